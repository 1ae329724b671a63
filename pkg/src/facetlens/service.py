"""HTTP service over a workspace directory.

Transport only: every mutation maps to exactly one module operation, and the
handlers do nothing but decode, delegate, and encode. Responses always use
the same envelope, with exactly one of ``payload`` / ``error`` present:

    {"status": "ok",    "payload": ...}
    {"status": "error", "error": {"code": ..., "message": ...}}

Version conflicts (409) additionally carry the resource's current version at
the top level so clients can refetch and replay without a second request.

Status codes: 400 malformed request shape, 404 unknown id, 409 stale
``expected_version``, 422 domain rule violation (machine-readable ``code``),
500 storage trouble.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path
from typing import Any, Optional

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__, store
from .core import join_many, validate_id
from .errors import (
    FacetLensError,
    SchemaError,
    StorageError,
    VersionConflict,
)
from .evaluate import EvalResult, merge_many, verify_composition
from .rules import Issue
from .session import (
    Judgment,
    ReportedIssue,
    Session,
    close_session,
    create_session,
    now_timestamp,
    record_judgment,
    session_result,
)
from .store import Workspace


class UnknownResource(FacetLensError):
    code = "not_found"


def _status_for(e: FacetLensError) -> int:
    if isinstance(e, UnknownResource):
        return 404
    if isinstance(e, VersionConflict):
        return 409
    if isinstance(e, SchemaError):
        return 400
    if isinstance(e, StorageError):
        return 500
    return 422


def _ok(payload: Any, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"status": "ok", "payload": payload}, status_code=status_code)


def _error(e: FacetLensError) -> JSONResponse:
    body: dict[str, Any] = {
        "status": "error",
        "error": {"code": e.code, "message": e.message},
    }
    if isinstance(e, VersionConflict):
        body["version"] = e.current_version
    return JSONResponse(body, status_code=_status_for(e))


def _need(doc: Any, key: str, kind: type, where: str) -> Any:
    return store._need(doc, key, kind, where)


def _issue_doc(issue: Issue) -> dict:
    return {
        "code": issue.code,
        "state_id": issue.state_id,
        "message": issue.message,
        "severity": issue.severity,
        "provenance": [[fid, side.value] for fid, side in sorted(issue.provenance)],
    }


class ServiceStore:
    """Workspace-backed state with per-session locks.

    Handlers run on a thread pool, so session mutations serialize on a lock
    per session id; reads of the document catalogs go straight to disk, the
    workspace being the single source of truth for everything but live
    session snapshots.
    """

    def __init__(self, root: str | Path):
        self.ws = Workspace(root)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._session_locks[session_id]

    def cache_session(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.id] = session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        conventional = self.ws.path_for("session", session_id)
        if conventional.exists():
            session = store.replay_session_log(conventional)
        else:
            for p in self.ws.session_paths():
                candidate = store.replay_session_log(p)
                if candidate.id == session_id:
                    session = candidate
                    break
            else:
                raise UnknownResource(f"no session {session_id!r}")
        self.cache_session(session)
        return session

    def session_log_path(self, session_id: str) -> Path:
        return self.ws.path_for("session", session_id)

    def get_dimension(self, dimension_id: str):
        dims = self.ws.dimensions()
        if dimension_id not in dims:
            raise UnknownResource(f"no dimension {dimension_id!r}")
        return dims[dimension_id]

    def get_use_case(self, use_case_id: str):
        ucs = self.ws.use_cases()
        if use_case_id not in ucs:
            raise UnknownResource(f"no use case {use_case_id!r}")
        return ucs[use_case_id]

    def get_rule_set(self, rule_set_id: str):
        rules = self.ws.rule_sets()
        if rule_set_id not in rules:
            raise UnknownResource(f"no rule set {rule_set_id!r}")
        return rules[rule_set_id]

    def get_result(self, result_id: str) -> EvalResult:
        path = self.ws.path_for("result", result_id)
        if not path.exists():
            raise UnknownResource(f"no result {result_id!r}")
        return store.load_result(path)


def create_app(workspace: str | Path, ui_dir: Optional[str | Path] = None) -> FastAPI:
    app = FastAPI(title="facetlens", version=__version__, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    svc = ServiceStore(workspace)
    app.state.svc = svc

    @app.exception_handler(FacetLensError)
    def domain_error(_request: Request, exc: FacetLensError):
        return _error(exc)

    @app.exception_handler(RequestValidationError)
    def request_error(_request: Request, exc: RequestValidationError):
        return _error(SchemaError(f"malformed request: {exc.errors()[:1]}"))

    @app.get("/healthz")
    def healthz():
        return _ok({"service": "facetlens", "version": __version__})

    # ---- dimensions ----

    @app.get("/dimensions")
    def list_dimensions():
        dims = svc.ws.dimensions()
        return _ok([store.dimension_to_doc(dims[k]) for k in sorted(dims)])

    @app.post("/dimensions")
    def post_dimension(doc: Any = Body(...)):
        d = store.dimension_from_doc(doc, "body")
        store.save_dimension(d, svc.ws.path_for("dimension", d.id))
        return _ok(store.dimension_to_doc(d), status_code=201)

    @app.post("/dimensions/join")
    def post_join(body: Any = Body(...)):
        ids = _need(body, "ids", list, "body")
        if len(ids) < 1:
            raise SchemaError("ids must name at least one dimension", path="body.ids")
        joined = join_many([svc.get_dimension(i) for i in ids])
        store.save_dimension(joined, svc.ws.path_for("dimension", joined.id))
        return _ok(store.dimension_to_doc(joined), status_code=201)

    # ---- use cases ----

    @app.get("/usecases")
    def list_usecases():
        ucs = svc.ws.use_cases()
        return _ok([store.usecase_to_doc(ucs[k]) for k in sorted(ucs)])

    @app.post("/usecases")
    def post_usecase(doc: Any = Body(...)):
        u = store.usecase_from_doc(doc, "body")
        store.save_use_case(u, svc.ws.path_for("usecase", u.id))
        return _ok(store.usecase_to_doc(u), status_code=201)

    # ---- rule sets ----

    @app.get("/rulesets")
    def list_rulesets():
        out = []
        for p in svc.ws.rules_paths():
            r = store.load_rules(p)
            out.append({"id": r.id, "text": p.read_text(encoding="utf-8")})
        return _ok(sorted(out, key=lambda x: x["id"]))

    @app.post("/rulesets")
    def post_ruleset(body: Any = Body(...)):
        rid = _need(body, "id", str, "body")
        text = _need(body, "text", str, "body")
        validate_id(rid)
        from .rules import parse_rules

        parse_rules(text, id=rid)  # reject broken text before persisting
        path = svc.ws.path_for("rules", rid)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return _ok({"id": rid, "text": text}, status_code=201)

    # ---- sessions ----

    @app.get("/sessions")
    def list_sessions():
        sessions = svc.ws.sessions()
        for s in sessions.values():
            svc.cache_session(s)
        return _ok(
            [
                {
                    "id": s.id,
                    "status": s.status.value,
                    "version": s.version,
                    "dimension_ids": list(s.dimension_ids),
                    "use_case_id": s.use_case.id,
                }
                for _, s in sorted(sessions.items())
            ]
        )

    @app.post("/sessions")
    def post_session(body: Any = Body(...)):
        dim_ids = _need(body, "dimension_ids", list, "body")
        use_case_id = _need(body, "use_case_id", str, "body")
        assignments = body.get("assignments") or None
        if assignments is not None and not isinstance(assignments, dict):
            raise SchemaError("assignments must be an object", path="body.assignments")
        session_id = body.get("id")
        if session_id is not None:
            validate_id(session_id, composite_ok=True)
        session = create_session(
            [svc.get_dimension(i) for i in dim_ids],
            svc.get_use_case(use_case_id),
            assignments,
            id=session_id,
            author=body.get("author", ""),
            timestamp=body.get("timestamp"),
        )
        log_path = svc.session_log_path(session.id)
        if log_path.exists():
            raise SchemaError(f"session {session.id!r} already exists", path="body.id")
        for event in store.session_to_events(session):
            store.append_session_event(log_path, event)
        svc.cache_session(session)
        return _ok(store.session_to_doc(session), status_code=201)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = svc.get_session(session_id)
        return _ok(
            {
                "session": store.session_to_doc(session),
                "dimensions": [store.dimension_to_doc(d) for d in session.dimensions],
                "use_case": store.usecase_to_doc(session.use_case),
            }
        )

    @app.post("/sessions/{session_id}/judgments")
    def post_judgment(session_id: str, body: Any = Body(...)):
        expected = _need(body, "expected_version", int, "body")
        issues = []
        for i, raw in enumerate(_need(body, "issues", list, "body")):
            where = f"body.issues[{i}]"
            issues.append(
                ReportedIssue(
                    code=_need(raw, "code", str, where),
                    message=_need(raw, "message", str, where),
                    severity=raw.get("severity"),
                )
            )
        judgment = Judgment(
            state_id=_need(body, "state_id", str, "body"),
            facet_id=_need(body, "facet_id", str, "body"),
            side=store._extreme(_need(body, "side", str, "body"), "body.side"),
            issues=tuple(issues),
            author=body.get("author", ""),
            timestamp=body.get("timestamp") or now_timestamp(),
        )
        with svc.session_lock(session_id):
            session = svc.get_session(session_id)
            updated = record_judgment(session, judgment, expected_version=expected)
            store.append_session_event(
                svc.session_log_path(session_id), store.judgment_to_event(judgment)
            )
            svc.cache_session(updated)
        return _ok(store.session_to_doc(updated))

    @app.post("/sessions/{session_id}/close")
    def post_close(session_id: str, body: Any = Body(...)):
        expected = _need(body, "expected_version", int, "body")
        with svc.session_lock(session_id):
            session = svc.get_session(session_id)
            updated = close_session(session, expected_version=expected)
            store.append_session_event(
                svc.session_log_path(session_id), {"event": "closed"}
            )
            svc.cache_session(updated)
        return _ok(store.session_to_doc(updated))

    @app.get("/sessions/{session_id}/result")
    def get_session_result(session_id: str, save: bool = False):
        session = svc.get_session(session_id)
        result = session_result(session)
        if save:
            store.save_result(result, svc.ws.path_for("result", session.id))
        return _ok(store.result_to_doc(result))

    # ---- results ----

    @app.get("/results")
    def list_results():
        out = []
        for p in svc.ws.result_paths():
            rid = p.name[: -len(store.RESULT_SUFFIX)]
            res = store.load_result(p)
            out.append(
                {
                    "id": rid,
                    "use_case_id": res.inputs.use_case_id,
                    "dimension_ids": list(res.inputs.dimension_ids),
                    "issues": len(res.issues),
                    "density": res.coverage.density,
                }
            )
        return _ok(sorted(out, key=lambda x: x["id"]))

    @app.get("/results/{result_id}")
    def get_result(result_id: str):
        return _ok(store.result_to_doc(svc.get_result(result_id)))

    @app.get("/results/{result_id}/coverage")
    def get_coverage(result_id: str):
        res = svc.get_result(result_id)
        doc = store.result_to_doc(res)
        return _ok({"cells": doc["coverage"], "density": res.coverage.density})

    @app.post("/results/merge")
    def post_merge(body: Any = Body(...)):
        ids = _need(body, "result_ids", list, "body")
        if not ids:
            raise SchemaError("result_ids must not be empty", path="body.result_ids")
        merged = merge_many([svc.get_result(i) for i in ids])
        save_as = body.get("save_as")
        if save_as is not None:
            validate_id(save_as, composite_ok=True)
            store.save_result(merged, svc.ws.path_for("result", save_as))
        return _ok(store.result_to_doc(merged))

    @app.post("/results/verify-merge")
    def post_verify_merge(body: Any = Body(...)):
        ids = _need(body, "result_ids", list, "body")
        if not ids:
            raise SchemaError("result_ids must not be empty", path="body.result_ids")
        results = [svc.get_result(i) for i in ids]
        merged = merge_many(results)
        flat: set = set()
        for r in results:
            flat |= r.issues.identities()
        equal = flat == merged.issues.identities()
        return _ok(
            {
                "equal": equal,
                "merged_issues": len(merged.issues),
                "only_flat": sorted(list(p) for p in flat - merged.issues.identities()),
                "only_merged": sorted(
                    list(p) for p in merged.issues.identities() - flat
                ),
            }
        )

    # ---- composition check ----

    @app.post("/verify")
    def post_verify(body: Any = Body(...)):
        ids = _need(body, "dimension_ids", list, "body")
        if len(ids) != 2:
            raise SchemaError(
                "dimension_ids must name exactly two dimensions", path="body.dimension_ids"
            )
        report = verify_composition(
            svc.get_dimension(ids[0]),
            svc.get_dimension(ids[1]),
            svc.get_use_case(_need(body, "use_case_id", str, "body")),
            svc.get_rule_set(_need(body, "rule_set_id", str, "body")),
        )
        return _ok(
            {
                "equal": report.equal,
                "joined_issues": len(report.joined.issues),
                "merged_issues": len(report.merged.issues),
                "only_joined": [_issue_doc(i) for i in report.only_joined],
                "only_merged": [_issue_doc(i) for i in report.only_merged],
            }
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/app", StaticFiles(directory=str(ui_dir), html=True), name="app")

    return app
