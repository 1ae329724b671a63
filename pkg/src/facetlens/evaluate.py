"""Type-level evaluation, result algebra, and the sampling baseline.

`evaluate` walks every (facet, state) pair of a dimension once, looking at
both scale extremes: cost is exactly ``2 * |facets| * |states|`` spot calls,
linear in the number of facets. Because a joined dimension deduplicates
shared facets, evaluating a composition never re-pays for overlap.

`merge_results` is the union on results. The central guarantee, checked by
`verify_composition`, is that evaluating a join equals merging the parts'
evaluations; it holds because evaluation distributes over the facet set and
issue-set union is associative, commutative and idempotent.

`sampling_baseline` is the contrast model: instead of walking types it spends
a budget of observations, each one a freshly sampled full-profile user looked
at on one sampled state. Rules fire only on exact extreme levels the user
happens to hold, and each user lands in exactly one of the ``2^F``
intersection cells (levels round to the nearer half of their scale, ties
toward MIN). With any realistic budget the cells stay mostly unvisited.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .core import Dimension, Extreme, FacetType, join_many
from .errors import SchemaError, UseCaseMismatch
from .rules import Issue, IssueSet, RuleSet, State, UseCase, spot


class CellStatus(str, Enum):
    EVALUATED = "EVALUATED"
    PENDING = "PENDING"


@dataclass(frozen=True)
class CellState:
    status: CellStatus
    issue_count: int = 0


CellKey = tuple[str, Extreme, str]  # (facet_id, extreme, state_id)


class CoverageMatrix:
    """Status of every (facet, extreme, state) cell in an evaluation scope.

    Union joins cell-wise: EVALUATED beats PENDING and issue counts join by
    max, so the union is idempotent and order-independent.
    """

    __slots__ = ("_cells",)

    def __init__(self, cells: Mapping[CellKey, CellState]):
        object.__setattr__(self, "_cells", dict(cells))

    @classmethod
    def all_pending(
        cls, facet_ids: Iterable[str], state_ids: Iterable[str]
    ) -> "CoverageMatrix":
        return cls(
            {
                (fid, side, sid): CellState(CellStatus.PENDING)
                for fid in facet_ids
                for side in (Extreme.MIN, Extreme.MAX)
                for sid in state_ids
            }
        )

    def get(self, facet_id: str, side: Extreme, state_id: str) -> Optional[CellState]:
        return self._cells.get((facet_id, side, state_id))

    def cells(self) -> Iterator[tuple[CellKey, CellState]]:
        return iter(sorted(self._cells.items()))

    def union(self, other: "CoverageMatrix") -> "CoverageMatrix":
        merged = dict(self._cells)
        for key, cell in other._cells.items():
            if key in merged:
                mine = merged[key]
                status = (
                    CellStatus.EVALUATED
                    if CellStatus.EVALUATED in (mine.status, cell.status)
                    else CellStatus.PENDING
                )
                merged[key] = CellState(status, max(mine.issue_count, cell.issue_count))
            else:
                merged[key] = cell
        return CoverageMatrix(merged)

    def __or__(self, other: "CoverageMatrix") -> "CoverageMatrix":
        return self.union(other)

    @property
    def density(self) -> float:
        """Fraction of cells evaluated; 1.0 means nothing was left pending."""
        if not self._cells:
            return 0.0
        done = sum(1 for c in self._cells.values() if c.status is CellStatus.EVALUATED)
        return done / len(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverageMatrix):
            return NotImplemented
        return self._cells == other._cells

    def __hash__(self):
        return hash(frozenset(self._cells.items()))

    def __repr__(self) -> str:
        return f"CoverageMatrix({len(self._cells)} cells, density={self.density:.2f})"


@dataclass(frozen=True)
class ResultInputs:
    """What produced a result. Dimension ids are stored as sorted atomic
    components so the same facet scope names itself identically whether it
    was evaluated joined or merged from parts."""

    dimension_ids: tuple[str, ...]
    use_case_id: str
    rule_set_ids: tuple[str, ...] = ()
    session_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalResult:
    inputs: ResultInputs
    state_ids: tuple[str, ...]
    issues: IssueSet
    coverage: CoverageMatrix
    spot_invocations: int = 0

    def same_findings(self, other: "EvalResult") -> bool:
        """Equality that matters for the result algebra: issues + coverage.
        The invocation counter is cost accounting, not a finding."""
        return self.issues == other.issues and self.coverage == other.coverage


def evaluate(
    d: Dimension,
    u: UseCase,
    r: RuleSet,
    *,
    max_workers: Optional[int] = None,
) -> EvalResult:
    """Walk both extremes of every facet over every state.

    Deterministic; with ``max_workers`` the (facet, state) pairs fan out to a
    thread pool and the outcome is identical to the sequential walk.
    """
    pairs = [(facet, state) for facet in d.facets for state in u.states]

    def look(pair: tuple[FacetType, State]):
        facet, state = pair
        return (
            (facet.id, Extreme.MIN, state.id, spot(facet.min_value, state, r)),
            (facet.id, Extreme.MAX, state.id, spot(facet.max_value, state, r)),
        )

    if max_workers is not None and max_workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            looked = list(pool.map(look, pairs))
    else:
        looked = [look(p) for p in pairs]

    cells: dict[CellKey, CellState] = {}
    all_issues: list[Issue] = []
    invocations = 0
    for halves in looked:
        for facet_id, side, state_id, found in halves:
            invocations += 1
            cells[(facet_id, side, state_id)] = CellState(
                CellStatus.EVALUATED, len(found)
            )
            all_issues.extend(found)

    return EvalResult(
        inputs=ResultInputs(
            dimension_ids=d.atomic_ids(),
            use_case_id=u.id,
            rule_set_ids=(r.id,),
        ),
        state_ids=u.state_ids(),
        issues=IssueSet(all_issues),
        coverage=CoverageMatrix(cells),
        spot_invocations=invocations,
    )


def merge_results(a: EvalResult, b: EvalResult) -> EvalResult:
    """Union two results over the same use case.

    Issues union under (code, state_id) identity with provenance merged;
    coverage joins cell-wise; the invocation counters add up, recording the
    total engine work behind the combined result.
    """
    if a.inputs.use_case_id != b.inputs.use_case_id or a.state_ids != b.state_ids:
        raise UseCaseMismatch(
            f"cannot merge results over different use cases: "
            f"{a.inputs.use_case_id!r} vs {b.inputs.use_case_id!r}"
        )
    return EvalResult(
        inputs=ResultInputs(
            dimension_ids=tuple(
                sorted(set(a.inputs.dimension_ids) | set(b.inputs.dimension_ids))
            ),
            use_case_id=a.inputs.use_case_id,
            rule_set_ids=tuple(
                sorted(set(a.inputs.rule_set_ids) | set(b.inputs.rule_set_ids))
            ),
            session_ids=tuple(
                sorted(set(a.inputs.session_ids) | set(b.inputs.session_ids))
            ),
        ),
        state_ids=a.state_ids,
        issues=a.issues | b.issues,
        coverage=a.coverage | b.coverage,
        spot_invocations=a.spot_invocations + b.spot_invocations,
    )


def merge_many(results: Sequence[EvalResult]) -> EvalResult:
    if not results:
        raise UseCaseMismatch("cannot merge an empty list of results")
    out = results[0]
    for r in results[1:]:
        out = merge_results(out, r)
    return out


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the composition check for one (d1, d2, u, r) instance."""

    equal: bool
    only_joined: tuple[Issue, ...]
    only_merged: tuple[Issue, ...]
    joined: EvalResult
    merged: EvalResult


def verify_composition(
    d1: Dimension, d2: Dimension, u: UseCase, r: RuleSet
) -> VerificationReport:
    """Check that evaluating join(d1, d2) equals merging separate evaluations.

    Equality is issue-set equality under (code, state_id) identity; the
    report carries the asymmetric difference for diagnosis when it fails.
    """
    from .core import join  # local to keep module import order flat

    joined = evaluate(join(d1, d2), u, r)
    merged = merge_results(evaluate(d1, u, r), evaluate(d2, u, r))
    joined_ids = joined.issues.identities()
    merged_ids = merged.issues.identities()
    only_joined = tuple(i for i in joined.issues if i.identity not in merged_ids)
    only_merged = tuple(i for i in merged.issues if i.identity not in joined_ids)
    return VerificationReport(
        equal=joined_ids == merged_ids,
        only_joined=only_joined,
        only_merged=only_merged,
        joined=joined,
        merged=merged,
    )


# ---- sampling baseline ----

@dataclass(frozen=True)
class BaselineReport:
    budget: int
    seed: int
    total_cells: int
    occupied_cells: int
    issues_found: IssueSet

    @property
    def cell_density(self) -> float:
        return self.occupied_cells / self.total_cells if self.total_cells else 0.0


def _half(level_index: int, scale_len: int) -> Extreme:
    # Which half of the scale a level falls in; the exact middle of an
    # odd-length scale counts as the MIN half.
    return Extreme.MAX if 2 * level_index > scale_len - 1 else Extreme.MIN


def sampling_baseline(
    dims: Sequence[Dimension],
    u: UseCase,
    r: RuleSet,
    budget: int,
    seed: int,
    level_weights: Optional[Mapping[str, Sequence[float]]] = None,
) -> BaselineReport:
    """Simulate user-sampling over the joined intersection space.

    One budget unit is one observation: a fresh full-profile user (one level
    per facet, uniform unless ``level_weights`` skews a facet) examined on
    one uniformly chosen state. Rules fire only on the exact extreme levels
    the user holds, so `issues_found` can never exceed what `evaluate` finds;
    each user occupies exactly one intersection cell.

    Deterministic for a fixed seed: draws happen facet-by-facet in sorted
    facet order, then the state, one observation at a time.
    """
    joined = join_many(list(dims))
    weights: dict[str, Sequence[float]] = {}
    for fid, w in (level_weights or {}).items():
        facet = joined.facet(fid)  # raises UnknownFacet for a bad id
        if len(w) != len(facet.scale):
            raise SchemaError(
                f"expected {len(facet.scale)} weights for facet {fid!r}, got {len(w)}",
                path=f"level_weights[{fid!r}]",
            )
        weights[fid] = w

    rng = random.Random(seed)
    occupied: set[tuple[Extreme, ...]] = set()
    found: list[Issue] = []
    for _ in range(budget):
        cell: list[Extreme] = []
        values = []
        for facet in joined.facets:
            if facet.id in weights:
                level = rng.choices(range(len(facet.scale)), weights=weights[facet.id])[0]
            else:
                level = rng.randrange(len(facet.scale))
            cell.append(_half(level, len(facet.scale)))
            values.append(facet.value_at(level))
        state = u.states[rng.randrange(len(u.states))]
        occupied.add(tuple(cell))
        for value in values:
            if value.extreme is not Extreme.NONE:
                found.extend(spot(value, state, r))

    return BaselineReport(
        budget=budget,
        seed=seed,
        total_cells=2 ** len(joined.facets),
        occupied_cells=len(occupied),
        issues_found=IssueSet(found),
    )
