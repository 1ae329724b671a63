"""File formats and workspace access.

One document kind per extension:

    <id>.dim.json       dimension
    <id>.usecase.json   use case
    <id>.rules          rules text
    <id>.session.jsonl  session event log, one JSON object per line
    <id>.result.json    evaluation result
    *.md / *.csv        rendered reports

JSON documents are written canonically: sorted keys, two-space indent,
trailing newline. Loading a file and saving it back is byte-identity. Every
document carries ``format_version`` (currently always 1) so the layout can
evolve without guessing.
"""

from __future__ import annotations

import fcntl
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from .core import Dimension, Extreme, make_dimension, make_facet_type
from .errors import FacetLensError, SchemaError, StorageError
from .evaluate import (
    CellState,
    CellStatus,
    CoverageMatrix,
    EvalResult,
    ResultInputs,
)
from .rules import Issue, IssueSet, RuleSet, State, UseCase, make_use_case, parse_rules, serialize_rules
from .session import (
    Judgment,
    ReportedIssue,
    Session,
    close_session,
    create_session,
    record_judgment,
)

FORMAT_VERSION = 1

DIMENSION_SUFFIX = ".dim.json"
USECASE_SUFFIX = ".usecase.json"
RULES_SUFFIX = ".rules"
SESSION_SUFFIX = ".session.jsonl"
RESULT_SUFFIX = ".result.json"


# ---- canonical JSON ----

def canonical_dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonical_line(doc: Any) -> str:
    # single-line form for JSONL logs
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def _reject_duplicate_keys(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise SchemaError(f"duplicate key {key!r}")
        out[key] = value
    return out


def parse_json(text: str, where: str = "") -> Any:
    try:
        return json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", path=f"{where}:{e.lineno}:{e.colno}") from None


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e.strerror or e}") from None


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e.strerror or e}") from None


# ---- field helpers ----

def _need(doc: Any, key: str, kind: type, where: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", path=where)
    if key not in doc:
        raise SchemaError(f"missing field {key!r}", path=where)
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(
            f"field {key!r} must be {kind.__name__}, got {type(value).__name__}",
            path=where,
        )
    return value


def _check_header(doc: Any, kind: str, where: str) -> None:
    got_kind = _need(doc, "kind", str, where)
    if got_kind != kind:
        raise SchemaError(f"expected kind {kind!r}, got {got_kind!r}", path=where)
    version = _need(doc, "format_version", int, where)
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported format_version {version} (this build reads {FORMAT_VERSION})",
            path=where,
        )


def _extreme(raw: Any, where: str) -> Extreme:
    if raw in ("MIN", "MAX"):
        return Extreme(raw)
    raise SchemaError(f"expected MIN or MAX, got {raw!r}", path=where)


# ---- dimensions ----

def dimension_to_doc(d: Dimension) -> dict:
    return {
        "kind": "dimension",
        "format_version": FORMAT_VERSION,
        "id": d.id,
        "label": d.label,
        "facets": [
            {
                "id": f.id,
                "label": f.label,
                "scale": list(f.scale),
                "description": f.description,
            }
            for f in d.facets
        ],
    }


def dimension_from_doc(doc: Any, where: str = "dimension") -> Dimension:
    _check_header(doc, "dimension", where)
    facets = []
    raw_facets = _need(doc, "facets", list, where)
    for i, raw in enumerate(raw_facets):
        fwhere = f"{where}.facets[{i}]"
        scale = _need(raw, "scale", list, fwhere)
        if not all(isinstance(level, str) for level in scale):
            raise SchemaError("scale levels must be strings", path=f"{fwhere}.scale")
        facets.append(
            make_facet_type(
                _need(raw, "id", str, fwhere),
                _need(raw, "label", str, fwhere),
                scale,
                raw.get("description", ""),
            )
        )
    return make_dimension(_need(doc, "id", str, where), _need(doc, "label", str, where), facets)


def load_dimension(path: str | Path) -> Dimension:
    p = Path(path)
    return dimension_from_doc(parse_json(_read_text(p), p.name), p.name)


def save_dimension(d: Dimension, path: str | Path) -> None:
    _write_text(Path(path), canonical_dumps(dimension_to_doc(d)))


# ---- use cases ----

def usecase_to_doc(u: UseCase) -> dict:
    return {
        "kind": "usecase",
        "format_version": FORMAT_VERSION,
        "id": u.id,
        "label": u.label,
        "states": [
            {"id": s.id, "label": s.label, "attributes": dict(s.attributes)}
            for s in u.states
        ],
    }


def usecase_from_doc(doc: Any, where: str = "usecase") -> UseCase:
    _check_header(doc, "usecase", where)
    states = []
    for i, raw in enumerate(_need(doc, "states", list, where)):
        swhere = f"{where}.states[{i}]"
        attributes = _need(raw, "attributes", dict, swhere)
        for name, value in attributes.items():
            if not isinstance(value, (str, bool, int, float)) or value is None:
                raise SchemaError(
                    f"attribute {name!r} must be a JSON scalar",
                    path=f"{swhere}.attributes",
                )
        states.append(
            State(
                id=_need(raw, "id", str, swhere),
                index=i,
                label=_need(raw, "label", str, swhere),
                attributes=attributes,
            )
        )
    return make_use_case(_need(doc, "id", str, where), _need(doc, "label", str, where), states)


def load_use_case(path: str | Path) -> UseCase:
    p = Path(path)
    return usecase_from_doc(parse_json(_read_text(p), p.name), p.name)


def save_use_case(u: UseCase, path: str | Path) -> None:
    _write_text(Path(path), canonical_dumps(usecase_to_doc(u)))


# ---- rules ----

def load_rules(path: str | Path) -> RuleSet:
    p = Path(path)
    ruleset_id = p.name[: -len(RULES_SUFFIX)] if p.name.endswith(RULES_SUFFIX) else p.stem
    return parse_rules(_read_text(p), id=ruleset_id)


def save_rules(r: RuleSet, path: str | Path) -> None:
    _write_text(Path(path), serialize_rules(r))


# ---- results ----

def result_to_doc(res: EvalResult) -> dict:
    # spot_invocations is runtime accounting, deliberately not persisted:
    # a merged result and a joined evaluation must serialize identically.
    return {
        "kind": "result",
        "format_version": FORMAT_VERSION,
        "inputs": {
            "dimension_ids": list(res.inputs.dimension_ids),
            "use_case_id": res.inputs.use_case_id,
            "rule_set_ids": list(res.inputs.rule_set_ids),
            "session_ids": list(res.inputs.session_ids),
        },
        "state_ids": list(res.state_ids),
        "issues": [
            {
                "code": i.code,
                "state_id": i.state_id,
                "message": i.message,
                "severity": i.severity,
                "provenance": [[fid, side.value] for fid, side in sorted(i.provenance)],
            }
            for i in res.issues
        ],
        "coverage": [
            {
                "facet_id": fid,
                "extreme": side.value,
                "state_id": sid,
                "status": cell.status.value,
                "issue_count": cell.issue_count,
            }
            for (fid, side, sid), cell in res.coverage.cells()
        ],
    }


def result_from_doc(doc: Any, where: str = "result") -> EvalResult:
    _check_header(doc, "result", where)
    raw_inputs = _need(doc, "inputs", dict, where)
    inputs = ResultInputs(
        dimension_ids=tuple(_need(raw_inputs, "dimension_ids", list, f"{where}.inputs")),
        use_case_id=_need(raw_inputs, "use_case_id", str, f"{where}.inputs"),
        rule_set_ids=tuple(raw_inputs.get("rule_set_ids", [])),
        session_ids=tuple(raw_inputs.get("session_ids", [])),
    )
    issues = []
    for i, raw in enumerate(_need(doc, "issues", list, where)):
        iwhere = f"{where}.issues[{i}]"
        severity = raw.get("severity")
        if severity is not None and not isinstance(severity, str):
            raise SchemaError("severity must be a string or null", path=iwhere)
        issues.append(
            Issue(
                code=_need(raw, "code", str, iwhere),
                state_id=_need(raw, "state_id", str, iwhere),
                message=_need(raw, "message", str, iwhere),
                severity=severity,
                provenance=frozenset(
                    (pair[0], _extreme(pair[1], iwhere))
                    for pair in _need(raw, "provenance", list, iwhere)
                ),
            )
        )
    cells: dict = {}
    for i, raw in enumerate(_need(doc, "coverage", list, where)):
        cwhere = f"{where}.coverage[{i}]"
        status = _need(raw, "status", str, cwhere)
        if status not in (CellStatus.EVALUATED.value, CellStatus.PENDING.value):
            raise SchemaError(f"unknown cell status {status!r}", path=cwhere)
        key = (
            _need(raw, "facet_id", str, cwhere),
            _extreme(_need(raw, "extreme", str, cwhere), cwhere),
            _need(raw, "state_id", str, cwhere),
        )
        cells[key] = CellState(CellStatus(status), _need(raw, "issue_count", int, cwhere))
    return EvalResult(
        inputs=inputs,
        state_ids=tuple(_need(doc, "state_ids", list, where)),
        issues=IssueSet(issues),
        coverage=CoverageMatrix(cells),
        spot_invocations=0,
    )


def load_result(path: str | Path) -> EvalResult:
    p = Path(path)
    return result_from_doc(parse_json(_read_text(p), p.name), p.name)


def save_result(res: EvalResult, path: str | Path) -> None:
    _write_text(Path(path), canonical_dumps(result_to_doc(res)))


# ---- session logs ----

def session_to_events(session: Session) -> list[dict]:
    events: list[dict] = [
        {
            "event": "created",
            "session_id": session.id,
            "author": session.created_by,
            "timestamp": session.created_at,
            "assignments": {team: sorted(fids) for team, fids in session.assignments},
            "dimensions": [dimension_to_doc(d) for d in session.dimensions],
            "use_case": usecase_to_doc(session.use_case),
        }
    ]
    for j in session.judgments:
        events.append(judgment_to_event(j))
    if session.status.value == "CLOSED":
        events.append({"event": "closed"})
    return events


def judgment_to_event(j: Judgment) -> dict:
    return {
        "event": "judgment",
        "state_id": j.state_id,
        "facet_id": j.facet_id,
        "side": j.side.value,
        "issues": [
            {"code": ri.code, "message": ri.message, "severity": ri.severity}
            for ri in j.issues
        ],
        "author": j.author,
        "timestamp": j.timestamp,
    }


def judgment_from_event(event: Any, where: str = "judgment") -> Judgment:
    issues = []
    for i, raw in enumerate(_need(event, "issues", list, where)):
        iwhere = f"{where}.issues[{i}]"
        issues.append(
            ReportedIssue(
                code=_need(raw, "code", str, iwhere),
                message=_need(raw, "message", str, iwhere),
                severity=raw.get("severity"),
            )
        )
    return Judgment(
        state_id=_need(event, "state_id", str, where),
        facet_id=_need(event, "facet_id", str, where),
        side=_extreme(_need(event, "side", str, where), where),
        issues=tuple(issues),
        author=_need(event, "author", str, where),
        timestamp=_need(event, "timestamp", str, where),
    )


def replay_events(events: Iterable[Any], where: str = "session") -> Session:
    """Fold an event log back into a session; pure, so identical logs yield
    identical sessions."""
    session: Optional[Session] = None
    for n, event in enumerate(events):
        ewhere = f"{where}[{n}]"
        kind = _need(event, "event", str, ewhere)
        if kind == "created":
            if session is not None:
                raise SchemaError("second 'created' event", path=ewhere)
            dims = [
                dimension_from_doc(raw, f"{ewhere}.dimensions[{i}]")
                for i, raw in enumerate(_need(event, "dimensions", list, ewhere))
            ]
            session = create_session(
                dims,
                usecase_from_doc(_need(event, "use_case", dict, ewhere), f"{ewhere}.use_case"),
                {
                    team: list(fids)
                    for team, fids in _need(event, "assignments", dict, ewhere).items()
                },
                id=_need(event, "session_id", str, ewhere),
                author=_need(event, "author", str, ewhere),
                timestamp=_need(event, "timestamp", str, ewhere),
            )
        elif session is None:
            raise SchemaError("log must start with a 'created' event", path=ewhere)
        elif kind == "judgment":
            session = record_judgment(
                session, judgment_from_event(event, ewhere), expected_version=session.version
            )
        elif kind == "closed":
            session = close_session(session, expected_version=session.version)
        else:
            raise SchemaError(f"unknown event kind {kind!r}", path=ewhere)
    if session is None:
        raise SchemaError("empty session log", path=where)
    return session


def read_session_log(path: str | Path) -> list[Any]:
    p = Path(path)
    events = []
    for n, line in enumerate(_read_text(p).splitlines()):
        if line.strip():
            events.append(parse_json(line, f"{p.name}:{n + 1}"))
    return events


def replay_session_log(path: str | Path) -> Session:
    p = Path(path)
    return replay_events(read_session_log(p), p.name)


def append_session_event(path: str | Path, event: dict) -> None:
    """Append one event line under an advisory exclusive lock."""
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "a", encoding="utf-8") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.write(canonical_line(event))
                fh.flush()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
    except OSError as e:
        raise StorageError(f"cannot append to {p}: {e.strerror or e}") from None


def write_session_log(session: Session, path: str | Path) -> None:
    _write_text(Path(path), "".join(canonical_line(e) for e in session_to_events(session)))


def session_to_doc(session: Session) -> dict:
    """Snapshot view of a session (not the stored format; logs are)."""
    return {
        "id": session.id,
        "dimension_ids": list(session.dimension_ids),
        "use_case_id": session.use_case.id,
        "assignments": {team: sorted(fids) for team, fids in session.assignments},
        "status": session.status.value,
        "version": session.version,
        "judgments": [judgment_to_event(j) for j in session.judgments],
    }


# ---- workspace ----

@dataclass(frozen=True)
class Diagnostic:
    file: str
    message: str

    def __str__(self) -> str:
        return f"{self.file}: {self.message}"


class Workspace:
    """A directory of documents, bound by naming convention only."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _glob(self, suffix: str) -> list[Path]:
        if not self.root.is_dir():
            raise StorageError(f"workspace {self.root} is not a directory")
        return sorted(p for p in self.root.iterdir() if p.name.endswith(suffix))

    def dimension_paths(self) -> list[Path]:
        return self._glob(DIMENSION_SUFFIX)

    def usecase_paths(self) -> list[Path]:
        return self._glob(USECASE_SUFFIX)

    def rules_paths(self) -> list[Path]:
        return self._glob(RULES_SUFFIX)

    def session_paths(self) -> list[Path]:
        return self._glob(SESSION_SUFFIX)

    def result_paths(self) -> list[Path]:
        return self._glob(RESULT_SUFFIX)

    def dimensions(self) -> dict[str, Dimension]:
        out = {}
        for p in self.dimension_paths():
            d = load_dimension(p)
            out[d.id] = d
        return out

    def use_cases(self) -> dict[str, UseCase]:
        out = {}
        for p in self.usecase_paths():
            u = load_use_case(p)
            out[u.id] = u
        return out

    def rule_sets(self) -> dict[str, RuleSet]:
        out = {}
        for p in self.rules_paths():
            r = load_rules(p)
            out[r.id] = r
        return out

    def results(self) -> dict[str, EvalResult]:
        out = {}
        for p in self.result_paths():
            out[p.name[: -len(RESULT_SUFFIX)]] = load_result(p)
        return out

    def sessions(self) -> dict[str, Session]:
        out = {}
        for p in self.session_paths():
            s = replay_session_log(p)
            out[s.id] = s
        return out

    def path_for(self, kind: str, id: str) -> Path:
        suffix = {
            "dimension": DIMENSION_SUFFIX,
            "usecase": USECASE_SUFFIX,
            "rules": RULES_SUFFIX,
            "session": SESSION_SUFFIX,
            "result": RESULT_SUFFIX,
        }[kind]
        return self.root / f"{id}{suffix}"


def validate_workspace(root: str | Path) -> list[Diagnostic]:
    """Scan a workspace for integrity problems.

    Catches per-file schema and parse failures, duplicate ids, facet scale
    conflicts across stored dimensions, and dangling references out of
    results (use case, dimensions, rule sets, sessions).
    """
    ws = Workspace(root)
    diags: list[Diagnostic] = []

    dims: dict[str, Dimension] = {}
    for p in ws.dimension_paths():
        try:
            d = load_dimension(p)
        except FacetLensError as e:
            diags.append(Diagnostic(p.name, e.message))
            continue
        if d.id in dims:
            diags.append(Diagnostic(p.name, f"duplicate dimension id {d.id!r}"))
        dims[d.id] = d

    scales: dict[str, tuple[str, tuple[str, ...]]] = {}
    for did in sorted(dims):
        for f in dims[did].facets:
            if f.id in scales and scales[f.id][1] != f.scale:
                diags.append(
                    Diagnostic(
                        f"{did}{DIMENSION_SUFFIX}",
                        f"facet {f.id!r} scale conflicts with dimension "
                        f"{scales[f.id][0]!r}: {list(f.scale)!r} vs {list(scales[f.id][1])!r}",
                    )
                )
            else:
                scales.setdefault(f.id, (did, f.scale))

    usecases: dict[str, UseCase] = {}
    for p in ws.usecase_paths():
        try:
            u = load_use_case(p)
        except FacetLensError as e:
            diags.append(Diagnostic(p.name, e.message))
            continue
        if u.id in usecases:
            diags.append(Diagnostic(p.name, f"duplicate use case id {u.id!r}"))
        usecases[u.id] = u

    rulesets: dict[str, RuleSet] = {}
    for p in ws.rules_paths():
        try:
            r = load_rules(p)
        except FacetLensError as e:
            diags.append(Diagnostic(p.name, e.message))
            continue
        rulesets[r.id] = r

    sessions: dict[str, Session] = {}
    for p in ws.session_paths():
        try:
            s = replay_session_log(p)
        except FacetLensError as e:
            diags.append(Diagnostic(p.name, e.message))
            continue
        if s.id in sessions:
            diags.append(Diagnostic(p.name, f"duplicate session id {s.id!r}"))
        sessions[s.id] = s

    known_atomic = set()
    for d in dims.values():
        known_atomic.update(d.atomic_ids())
    for p in ws.result_paths():
        try:
            res = load_result(p)
        except FacetLensError as e:
            diags.append(Diagnostic(p.name, e.message))
            continue
        if res.inputs.use_case_id not in usecases:
            diags.append(
                Diagnostic(p.name, f"references missing use case {res.inputs.use_case_id!r}")
            )
        for did in res.inputs.dimension_ids:
            if did not in known_atomic:
                diags.append(Diagnostic(p.name, f"references missing dimension {did!r}"))
        for rid in res.inputs.rule_set_ids:
            if rid not in rulesets:
                diags.append(Diagnostic(p.name, f"references missing rule set {rid!r}"))
        for sid in res.inputs.session_ids:
            if sid not in sessions:
                diags.append(Diagnostic(p.name, f"references missing session {sid!r}"))

    return sorted(diags, key=lambda d: (d.file, d.message))
