"""Walkthrough sessions: append-only human judgments over a joined scope.

A session pins its inputs at creation time (dimension and use-case snapshots
travel with it, so a log replays without external lookups). Judgments are
never edited or deleted; the effective answer for a (state, facet, side) cell
is the judgment with the latest timestamp, ties broken by log position. An
explicit judgment with zero issues marks the cell evaluated-and-clean, which
is a different fact than never having looked.

Every accepted mutation bumps ``version`` by one. Mutators take the caller's
``expected_version`` and refuse to apply against anything else; that is the
whole concurrency story, and it works because state is a pure fold over the
judgment log.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .core import Dimension, Extreme, join_many
from .errors import (
    InteriorValue,
    OutOfScope,
    OverlappingAssignment,
    SchemaError,
    SessionClosed,
    UnknownFacet,
    VersionConflict,
)
from .evaluate import (
    CellState,
    CellStatus,
    CoverageMatrix,
    EvalResult,
    ResultInputs,
    merge_many,
)
from .rules import SEVERITIES, Issue, IssueSet, UseCase


class SessionStatus(str, Enum):
    OPEN = "OPEN"
    CLOSED = "CLOSED"


@dataclass(frozen=True)
class ReportedIssue:
    """One issue as entered by a person: no state or provenance, those come
    from the judgment that carries it."""

    code: str
    message: str
    severity: Optional[str] = None

    def __post_init__(self):
        if self.severity is not None and self.severity not in SEVERITIES:
            raise SchemaError(
                f"severity must be one of {', '.join(SEVERITIES)}, "
                f"got {self.severity!r}",
                path="issues.severity",
            )


@dataclass(frozen=True)
class Judgment:
    state_id: str
    facet_id: str
    side: Extreme
    issues: tuple[ReportedIssue, ...]
    author: str
    timestamp: str  # ISO-8601

    def __post_init__(self):
        _parse_timestamp(self.timestamp)


def _parse_timestamp(value: str) -> datetime:
    try:
        return datetime.fromisoformat(value)
    except (TypeError, ValueError):
        raise SchemaError(
            f"timestamp must be ISO-8601, got {value!r}", path="timestamp"
        ) from None


def now_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class Session:
    id: str
    dimensions: tuple[Dimension, ...]
    use_case: UseCase
    assignments: tuple[tuple[str, frozenset[str]], ...]
    judgments: tuple[Judgment, ...]
    status: SessionStatus
    version: int
    created_by: str = ""
    created_at: str = ""

    @property
    def dimension_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.dimensions)

    def joined_dimension(self) -> Dimension:
        return join_many(self.dimensions)

    def assigned_facet_ids(self) -> frozenset[str]:
        out: set[str] = set()
        for _, fids in self.assignments:
            out |= fids
        return frozenset(out)

    def team_for(self, facet_id: str) -> Optional[str]:
        for team, fids in self.assignments:
            if facet_id in fids:
                return team
        return None


def create_session(
    dims: Sequence[Dimension],
    use_case: UseCase,
    assignments: Optional[Mapping[str, Iterable[str]]] = None,
    *,
    id: Optional[str] = None,
    author: str = "",
    timestamp: Optional[str] = None,
) -> Session:
    """Open a session over the join of ``dims``.

    ``assignments`` hands disjoint facet subsets to named subteams; facets in
    no subteam cannot be judged (their cells stay visible as gaps). An empty
    or missing mapping means one implicit team owning every facet.
    """
    joined = join_many(list(dims))  # surfaces ScaleConflict early
    scope = set(joined.facet_ids())
    if not assignments:
        normalized: dict[str, frozenset[str]] = {"all": frozenset(scope)}
    else:
        normalized = {}
        owner: dict[str, str] = {}
        for team in sorted(assignments):
            fids = frozenset(assignments[team])
            for fid in sorted(fids):
                if fid not in scope:
                    raise UnknownFacet(
                        f"assignment {team!r} references unknown facet {fid!r}"
                    )
                if fid in owner:
                    raise OverlappingAssignment(
                        f"facet {fid!r} assigned to both {owner[fid]!r} and {team!r}"
                    )
                owner[fid] = team
            normalized[team] = fids
    return Session(
        id=id or uuid.uuid4().hex,
        dimensions=tuple(dims),
        use_case=use_case,
        assignments=tuple(sorted((t, f) for t, f in normalized.items())),
        judgments=(),
        status=SessionStatus.OPEN,
        version=1,
        created_by=author,
        created_at=timestamp if timestamp is not None else now_timestamp(),
    )


def record_judgment(
    session: Session, judgment: Judgment, expected_version: int
) -> Session:
    """Append one judgment; returns the successor session state.

    Raises:
        SessionClosed: no mutations after close.
        VersionConflict: ``expected_version`` is stale; carries the current
            version so the caller can refetch and replay.
        OutOfScope: state or facet outside the session's scope, or the facet
            is not assigned to any subteam.
        InteriorValue: judgments target extremes, never interior levels.
    """
    if session.status is SessionStatus.CLOSED:
        raise SessionClosed(f"session {session.id!r} is closed")
    if expected_version != session.version:
        raise VersionConflict(
            f"expected version {expected_version}, session is at {session.version}",
            current_version=session.version,
        )
    if judgment.side is Extreme.NONE:
        raise InteriorValue("judgments are recorded at MIN or MAX, not interior")
    if not session.use_case.has_state(judgment.state_id):
        raise OutOfScope(
            f"state {judgment.state_id!r} is not part of use case "
            f"{session.use_case.id!r}"
        )
    joined = session.joined_dimension()
    if not joined.has_facet(judgment.facet_id):
        raise OutOfScope(
            f"facet {judgment.facet_id!r} is not part of this session's dimensions"
        )
    if session.team_for(judgment.facet_id) is None:
        raise OutOfScope(
            f"facet {judgment.facet_id!r} is not assigned to any subteam"
        )
    return replace(
        session,
        judgments=session.judgments + (judgment,),
        version=session.version + 1,
    )


def close_session(session: Session, expected_version: int) -> Session:
    if session.status is SessionStatus.CLOSED:
        raise SessionClosed(f"session {session.id!r} is already closed")
    if expected_version != session.version:
        raise VersionConflict(
            f"expected version {expected_version}, session is at {session.version}",
            current_version=session.version,
        )
    return replace(session, status=SessionStatus.CLOSED, version=session.version + 1)


def _winning_judgments(session: Session) -> dict[tuple[str, str, Extreme], Judgment]:
    # Latest timestamp wins; a tie goes to the later log entry, which the
    # ascending scan gives us for free with >=.
    winners: dict[tuple[str, str, Extreme], tuple[datetime, Judgment]] = {}
    for j in session.judgments:
        key = (j.state_id, j.facet_id, j.side)
        stamp = _parse_timestamp(j.timestamp)
        if key not in winners or stamp >= winners[key][0]:
            winners[key] = (stamp, j)
    return {key: j for key, (_, j) in winners.items()}


def session_result(session: Session) -> EvalResult:
    """Fold the judgment log into a result.

    Cells with a winning judgment are EVALUATED (zero issues counts: that is
    the explicit all-clear); everything else in the joined scope is PENDING.
    ``spot_invocations`` stays 0: human walkthroughs are not engine calls.
    """
    joined = session.joined_dimension()
    coverage = CoverageMatrix.all_pending(joined.facet_ids(), session.use_case.state_ids())
    cells = {key: cell for key, cell in coverage.cells()}
    issues: list[Issue] = []
    for (state_id, facet_id, side), j in _winning_judgments(session).items():
        cells[(facet_id, side, state_id)] = CellState(
            CellStatus.EVALUATED, len(j.issues)
        )
        for reported in j.issues:
            issues.append(
                Issue(
                    code=reported.code,
                    state_id=state_id,
                    message=reported.message,
                    provenance=frozenset({(facet_id, side)}),
                    severity=reported.severity,
                )
            )
    atomic: set[str] = set()
    for d in session.dimensions:
        atomic |= set(d.atomic_ids())
    return EvalResult(
        inputs=ResultInputs(
            dimension_ids=tuple(sorted(atomic)),
            use_case_id=session.use_case.id,
            session_ids=(session.id,),
        ),
        state_ids=session.use_case.state_ids(),
        issues=IssueSet(issues),
        coverage=CoverageMatrix(cells),
        spot_invocations=0,
    )


def merge_sessions(sessions: Sequence[Session]) -> EvalResult:
    """Union of the sessions' results; they must share a use case."""
    return merge_many([session_result(s) for s in sessions])
