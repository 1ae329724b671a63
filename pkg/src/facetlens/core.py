"""Facet types, dimensions, and personas.

A facet type is a named ordered scale (e.g. risk attitude from risk-tolerant
to risk-averse). A dimension is a set of facet types identified by canonical
ids. Dimensions compose by set union (`join`), which is what keeps evaluation
cost linear in the number of facets instead of exponential in their
combinations: downstream analysis walks facet extremes one at a time rather
than enumerating every cross-product of values.

Identity decisions, fixed here and relied on everywhere else:

* Facet identity is the canonical id string. Two facets with the same id and
  a different scale can never coexist (`ScaleConflict`).
* Atomic ids are lowercase-hyphenated (``attitude-toward-risk``). The ``+``
  character is reserved: a joined dimension's id is the sorted ``+``-join of
  its operands' atomic components, so composite ids can always be split back
  into the atomic dimensions they came from.
* Scale direction is data. ``scale[0]`` is the MIN end and ``scale[-1]`` the
  MAX end; nothing in the engine attaches valence to either end.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadId,
    DimensionMismatch,
    DuplicateFacetId,
    DuplicateLevel,
    EmptyDimension,
    InteriorValue,
    OverlappingAssignment,
    ScaleConflict,
    ScaleTooShort,
    UnassignedFacet,
    UnknownFacet,
)

_ATOMIC_ID = re.compile(r"^[a-z0-9]+(?:-[a-z0-9]+)*$")

COMPOSITE_SEPARATOR = "+"


class Extreme(str, Enum):
    """Position of a facet value on its scale. Interior values are NONE."""

    MIN = "MIN"
    MAX = "MAX"
    NONE = "NONE"


def is_atomic_id(candidate: str) -> bool:
    return bool(_ATOMIC_ID.match(candidate))


def validate_id(candidate: str, *, composite_ok: bool = False) -> str:
    """Check an identifier against the canonical grammar.

    Atomic ids are lowercase alphanumerics with single hyphens between runs.
    With ``composite_ok`` the id may also be several atomic components joined
    by ``+`` (the form `join` produces).
    """
    if not isinstance(candidate, str) or not candidate:
        raise BadId(f"id must be a non-empty string, got {candidate!r}")
    parts = candidate.split(COMPOSITE_SEPARATOR) if composite_ok else [candidate]
    for part in parts:
        if not is_atomic_id(part):
            raise BadId(
                f"id {candidate!r} is not canonical; expected lowercase "
                f"hyphenated segments like 'attitude-toward-risk'"
            )
    return candidate


def atomic_components(dimension_id: str) -> tuple[str, ...]:
    """Sorted atomic components of a (possibly composite) dimension id."""
    return tuple(sorted(set(dimension_id.split(COMPOSITE_SEPARATOR))))


# ---- facet types ----

@dataclass(frozen=True)
class FacetType:
    """An ordered scale of level labels with a canonical id.

    The first and last levels are the extremes the engine walks; everything
    between is representable (sampled users may hold interior levels) but is
    never targeted by rules or personas.
    """

    id: str
    label: str
    scale: tuple[str, ...]
    description: str = ""

    @property
    def min_level(self) -> str:
        return self.scale[0]

    @property
    def max_level(self) -> str:
        return self.scale[-1]

    def level_index(self, level: str) -> int:
        return self.scale.index(level)

    def extreme_of(self, level_index: int) -> Extreme:
        if level_index == 0:
            return Extreme.MIN
        if level_index == len(self.scale) - 1:
            return Extreme.MAX
        return Extreme.NONE

    def value_at(self, level_index: int) -> "FacetValue":
        if not 0 <= level_index < len(self.scale):
            raise UnknownFacet(
                f"facet {self.id!r} has no level index {level_index}"
            )
        return FacetValue(self.id, level_index, self.extreme_of(level_index))

    @property
    def min_value(self) -> "FacetValue":
        return self.value_at(0)

    @property
    def max_value(self) -> "FacetValue":
        return self.value_at(len(self.scale) - 1)

    def extreme_value(self, side: Extreme) -> "FacetValue":
        if side is Extreme.MIN:
            return self.min_value
        if side is Extreme.MAX:
            return self.max_value
        raise InteriorValue(
            f"facet {self.id!r}: only MIN/MAX extremes can be targeted"
        )


def make_facet_type(
    id: str,
    label: str,
    scale: Sequence[str],
    description: str = "",
) -> FacetType:
    """Build a validated facet type.

    Raises:
        BadId: id does not match the canonical atomic grammar.
        ScaleTooShort: fewer than two levels.
        DuplicateLevel: repeated level label.
    """
    validate_id(id)
    levels = tuple(scale)
    if len(levels) < 2:
        raise ScaleTooShort(
            f"facet {id!r} needs at least two levels, got {len(levels)}"
        )
    seen: set[str] = set()
    for level in levels:
        if not isinstance(level, str) or not level:
            raise DuplicateLevel(
                f"facet {id!r}: levels must be non-empty strings, got {level!r}"
            )
        if level in seen:
            raise DuplicateLevel(f"facet {id!r}: duplicate level {level!r}")
        seen.add(level)
    return FacetType(id=id, label=label, scale=levels, description=description)


@dataclass(frozen=True)
class FacetValue:
    """One position on one facet's scale.

    ``extreme`` is redundant with ``level_index`` given the owning scale; it
    is carried so that downstream code never needs the scale back just to ask
    "is this an end of the range".
    """

    facet_id: str
    level_index: int
    extreme: Extreme


# ---- dimensions ----

@dataclass(frozen=True)
class Dimension:
    """A set of facet types keyed by facet id.

    Facets are stored sorted by id, which makes equality, iteration order,
    and serialization canonical without any extra bookkeeping.
    """

    id: str
    label: str
    facets: tuple[FacetType, ...]

    def facet_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.facets)

    def facet(self, facet_id: str) -> FacetType:
        for f in self.facets:
            if f.id == facet_id:
                return f
        raise UnknownFacet(f"dimension {self.id!r} has no facet {facet_id!r}")

    def has_facet(self, facet_id: str) -> bool:
        return any(f.id == facet_id for f in self.facets)

    def atomic_ids(self) -> tuple[str, ...]:
        return atomic_components(self.id)


def make_dimension(id: str, label: str, facets: Iterable[FacetType]) -> Dimension:
    """Build a validated dimension from facet types.

    Raises:
        BadId: id fails the grammar (composite ids are allowed, since joined
            dimensions round-trip through storage).
        EmptyDimension: no facets.
        DuplicateFacetId: two facets share an id.
    """
    validate_id(id, composite_ok=True)
    ordered = tuple(sorted(facets, key=lambda f: f.id))
    if not ordered:
        raise EmptyDimension(f"dimension {id!r} has no facets")
    seen: set[str] = set()
    for f in ordered:
        if f.id in seen:
            raise DuplicateFacetId(
                f"dimension {id!r}: facet id {f.id!r} appears twice"
            )
        seen.add(f.id)
    return Dimension(id=id, label=label, facets=ordered)


def _merge_facet(a: FacetType, b: FacetType) -> FacetType:
    # Identity is the id; scales must agree exactly. Label/description pick
    # the lexicographic minimum so the merge is order-independent.
    if a.scale != b.scale:
        raise ScaleConflict(
            f"facet {a.id!r} has conflicting scales: "
            f"{list(a.scale)!r} vs {list(b.scale)!r}"
        )
    if a == b:
        return a
    label = min(a.label, b.label)
    description = min(a.description, b.description) if (a.description and b.description) else (a.description or b.description)
    return FacetType(id=a.id, label=label, scale=a.scale, description=description)


def _joined_label(a: str, b: str) -> str:
    parts = sorted(set(a.split(" + ")) | set(b.split(" + ")))
    return " + ".join(parts)


def join(d1: Dimension, d2: Dimension) -> Dimension:
    """Union of two dimensions' facet sets.

    The result's id is the sorted ``+``-join of both operands' atomic
    components, so ids commute and associate the same way facet sets do.
    Shared facet ids are deduplicated; a shared id with a different scale is a
    hard `ScaleConflict`.
    """
    merged: dict[str, FacetType] = {f.id: f for f in d1.facets}
    for f in d2.facets:
        merged[f.id] = _merge_facet(merged[f.id], f) if f.id in merged else f
    joined_id = COMPOSITE_SEPARATOR.join(
        sorted(set(d1.atomic_ids()) | set(d2.atomic_ids()))
    )
    return Dimension(
        id=joined_id,
        label=_joined_label(d1.label, d2.label),
        facets=tuple(sorted(merged.values(), key=lambda f: f.id)),
    )


def join_many(dims: Sequence[Dimension]) -> Dimension:
    """Fold `join` over one or more dimensions."""
    if not dims:
        raise EmptyDimension("cannot join an empty list of dimensions")
    out = dims[0]
    for d in dims[1:]:
        out = join(out, d)
    return out


def partition(d: Dimension, groups: Mapping[str, Iterable[str]]) -> dict[str, Dimension]:
    """Split a dimension into named sub-dimensions.

    ``groups`` maps a group name (used as the sub-dimension's id) to the facet
    ids it receives. The groups must be disjoint and cover every facet, so
    that folding `join` back over the parts restores the original facet set.

    Raises:
        BadId: a group name is not a canonical atomic id.
        UnknownFacet: a group references a facet the dimension lacks.
        OverlappingAssignment: a facet appears in more than one group.
        UnassignedFacet: a facet of the dimension is in no group.
        EmptyDimension: a group is empty.
    """
    owner: dict[str, str] = {}
    result: dict[str, Dimension] = {}
    for group_name in sorted(groups):
        validate_id(group_name)
        facet_ids = list(groups[group_name])
        members: list[FacetType] = []
        for fid in facet_ids:
            if not d.has_facet(fid):
                raise UnknownFacet(
                    f"group {group_name!r} references unknown facet {fid!r}"
                )
            if fid in owner:
                raise OverlappingAssignment(
                    f"facet {fid!r} assigned to both {owner[fid]!r} and {group_name!r}"
                )
            owner[fid] = group_name
            members.append(d.facet(fid))
        result[group_name] = make_dimension(
            group_name, f"{d.label}: {group_name}", members
        )
    leftover = [fid for fid in d.facet_ids() if fid not in owner]
    if leftover:
        raise UnassignedFacet(
            f"facets not assigned to any group: {', '.join(leftover)}"
        )
    return result


# ---- personas ----

@dataclass(frozen=True)
class Persona:
    """A named profile holding one extreme value per facet of a dimension."""

    id: str
    dimension_id: str
    name: str
    values: tuple[FacetValue, ...]

    def value_for(self, facet_id: str) -> FacetValue:
        for v in self.values:
            if v.facet_id == facet_id:
                return v
        raise UnknownFacet(f"persona {self.id!r} has no value for {facet_id!r}")


def make_persona(
    d: Dimension,
    id: str,
    name: str,
    sides: Mapping[str, Extreme],
) -> Persona:
    """Build a persona assigning the given extreme side per facet.

    Every facet of ``d`` must get exactly one side, and interior positions
    are rejected: personas exist to pin the ends of each scale.
    """
    validate_id(id, composite_ok=True)
    unknown = sorted(set(sides) - set(d.facet_ids()))
    if unknown:
        raise UnknownFacet(
            f"persona {id!r} assigns unknown facets: {', '.join(unknown)}"
        )
    missing = [fid for fid in d.facet_ids() if fid not in sides]
    if missing:
        raise UnassignedFacet(
            f"persona {id!r} leaves facets unassigned: {', '.join(missing)}"
        )
    values = []
    for f in d.facets:
        side = sides[f.id]
        if side is Extreme.NONE:
            raise InteriorValue(
                f"persona {id!r}: facet {f.id!r} must sit at MIN or MAX"
            )
        values.append(f.extreme_value(side))
    return Persona(id=id, dimension_id=d.id, name=name, values=tuple(values))


def synthesize_personas(
    d: Dimension,
    name_min: str = "Min",
    name_max: str = "Max",
) -> tuple[Persona, Persona]:
    """The canonical persona pair for a dimension: all-MIN and all-MAX.

    Two personas per dimension suffice to cover every facet extreme, which is
    the whole point of walking types instead of sampled individuals.
    """
    low = make_persona(
        d, f"{d.id}-min", name_min, {fid: Extreme.MIN for fid in d.facet_ids()}
    )
    high = make_persona(
        d, f"{d.id}-max", name_max, {fid: Extreme.MAX for fid in d.facet_ids()}
    )
    return low, high


@dataclass(frozen=True)
class PersonaCoverageReport:
    """Which (facet, extreme) pairs a persona set pins down."""

    dimension_id: str
    covered: frozenset[tuple[str, Extreme]]
    missing: frozenset[tuple[str, Extreme]]

    @property
    def complete(self) -> bool:
        return not self.missing


def coverage_check(personas: Sequence[Persona], d: Dimension) -> PersonaCoverageReport:
    """Report which facet extremes of ``d`` the personas collectively reach.

    Personas may mix MIN and MAX per facet (field personas usually do); the
    report only cares that both ends of every facet are hit by someone.
    """
    needed = {
        (fid, side)
        for fid in d.facet_ids()
        for side in (Extreme.MIN, Extreme.MAX)
    }
    covered: set[tuple[str, Extreme]] = set()
    for p in personas:
        if p.dimension_id != d.id:
            raise DimensionMismatch(
                f"persona {p.id!r} belongs to dimension {p.dimension_id!r}, "
                f"not {d.id!r}"
            )
        for v in p.values:
            if not d.has_facet(v.facet_id):
                raise UnknownFacet(
                    f"persona {p.id!r} carries unknown facet {v.facet_id!r}"
                )
            if v.extreme is not Extreme.NONE:
                covered.add((v.facet_id, v.extreme))
    return PersonaCoverageReport(
        dimension_id=d.id,
        covered=frozenset(covered & needed),
        missing=frozenset(needed - covered),
    )
