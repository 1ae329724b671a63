import random

import pytest
from hypothesis import given, settings, strategies as st

from facetlens.core import (
    Extreme,
    atomic_components,
    coverage_check,
    join,
    join_many,
    make_dimension,
    make_facet_type,
    make_persona,
    partition,
    synthesize_personas,
    validate_id,
)
from facetlens.errors import (
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

from .oracle import random_dimension, random_facet


def test_facet_type_extremes():
    f = make_facet_type("depth", "Depth", ("shallow", "mid", "deep"))
    assert f.min_level == "shallow"
    assert f.max_level == "deep"
    assert f.extreme_of(0) is Extreme.MIN
    assert f.extreme_of(2) is Extreme.MAX
    assert f.extreme_of(1) is Extreme.NONE
    assert f.level_index("mid") == 1
    assert f.extreme_value(Extreme.MIN).level_index == 0
    assert f.extreme_value(Extreme.MAX).level_index == 2


def test_facet_type_rejects_bad_input():
    with pytest.raises(BadId):
        make_facet_type("Depth!", "Depth", ("a", "b"))
    with pytest.raises(ScaleTooShort):
        make_facet_type("depth", "Depth", ("only",))
    with pytest.raises(DuplicateLevel):
        make_facet_type("depth", "Depth", ("a", "b", "a"))
    f = make_facet_type("depth", "Depth", ("a", "b"))
    with pytest.raises(ValueError):
        f.level_index("zzz")
    with pytest.raises(InteriorValue):
        f.extreme_value(Extreme.NONE)


def test_validate_id_rules():
    validate_id("a-b-c")
    validate_id("x1+y2", composite_ok=True)
    for bad in ("", "-a", "a-", "A", "a_b", "a+b"):
        with pytest.raises(BadId):
            validate_id(bad)


def test_dimension_sorts_and_rejects_duplicates():
    a = make_facet_type("beta", "B", ("x", "y"))
    b = make_facet_type("alfa", "A", ("x", "y"))
    d = make_dimension("demo", "Demo", [a, b])
    assert d.facet_ids() == ("alfa", "beta")
    with pytest.raises(DuplicateFacetId):
        make_dimension("demo", "Demo", [a, a])
    with pytest.raises(EmptyDimension):
        make_dimension("demo", "Demo", [])


def test_join_shared_facets_count(gender_dim, ses_dim):
    joined = join(gender_dim, ses_dim)
    assert joined.id == "gender+ses"
    # 5 + 5 facets with 2 shared: the union must hold exactly 8.
    assert len(joined.facets) == 8
    shared = set(gender_dim.facet_ids()) & set(ses_dim.facet_ids())
    assert shared == {"attitude-toward-risk", "computer-self-efficacy"}


def test_join_conflicting_scales():
    a = make_dimension("a", "A", [make_facet_type("f", "F", ("x", "y"))])
    b = make_dimension("b", "B", [make_facet_type("f", "F", ("x", "y", "z"))])
    with pytest.raises(ScaleConflict):
        join(a, b)


def test_join_many_requires_input():
    with pytest.raises(EmptyDimension):
        join_many([])


def test_atomic_components():
    assert atomic_components("gender+ses") == ("gender", "ses")
    assert atomic_components("ses+gender+ses") == ("gender", "ses")
    assert atomic_components("solo") == ("solo",)


@st.composite
def dimensions(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    taken = set()
    pool = [random_facet(rng, taken) for _ in range(3)]
    return (
        random_dimension(rng, taken, facet_pool=pool, max_facets=4),
        random_dimension(rng, taken, facet_pool=pool, max_facets=4),
        random_dimension(rng, taken, facet_pool=pool, max_facets=4),
    )


def _facet_map(d):
    return {f.id: f.scale for f in d.facets}


@settings(max_examples=60, deadline=None)
@given(dimensions())
def test_join_is_commutative_associative_idempotent(dims):
    a, b, c = dims
    assert _facet_map(join(a, b)) == _facet_map(join(b, a))
    assert join(a, b).id == join(b, a).id
    assert _facet_map(join(join(a, b), c)) == _facet_map(join(a, join(b, c)))
    assert join(join(a, b), c).id == join(a, join(b, c)).id
    assert _facet_map(join(a, a)) == _facet_map(a)


def test_partition_round_trip(gender_dim, ses_dim):
    joined = join(gender_dim, ses_dim)
    ids = list(joined.facet_ids())
    parts = partition(joined, {"left": ids[:3], "right": ids[3:]})
    assert set(parts) == {"left", "right"}
    rejoined = join(parts["left"], parts["right"])
    assert _facet_map(rejoined) == _facet_map(joined)


def test_partition_errors(gender_dim):
    ids = list(gender_dim.facet_ids())
    with pytest.raises(UnassignedFacet):
        partition(gender_dim, {"only": ids[:2]})
    with pytest.raises(OverlappingAssignment):
        partition(gender_dim, {"a": ids[:3], "b": ids[2:]})
    with pytest.raises(UnknownFacet):
        partition(gender_dim, {"a": ids[:-1] + ["nope"], "b": ids[-1:]})
    with pytest.raises(BadId):
        partition(gender_dim, {"Bad Name": ids})
    with pytest.raises(EmptyDimension):
        partition(gender_dim, {"a": ids, "b": []})


def test_personas_land_on_extremes(gender_dim):
    lo, hi = synthesize_personas(gender_dim)
    assert lo.id == "gender-min" and hi.id == "gender-max"
    for v in lo.values:
        assert v.extreme is Extreme.MIN and v.level_index == 0
    for v in hi.values:
        assert v.extreme is Extreme.MAX
    report = coverage_check([lo, hi], gender_dim)
    assert report.complete
    assert not report.missing


def test_persona_construction_errors(gender_dim, ses_dim):
    sides = {fid: Extreme.MIN for fid in gender_dim.facet_ids()}
    p = make_persona(gender_dim, "p", "P", sides)
    assert p.value_for("motivations").extreme is Extreme.MIN
    with pytest.raises(InteriorValue):
        make_persona(gender_dim, "p", "P", {**sides, "motivations": Extreme.NONE})
    with pytest.raises(UnassignedFacet):
        make_persona(gender_dim, "p", "P", {"motivations": Extreme.MIN})
    with pytest.raises(UnknownFacet):
        make_persona(gender_dim, "p", "P", {**sides, "nope": Extreme.MIN})
    with pytest.raises(DimensionMismatch):
        coverage_check([p], ses_dim)


def test_coverage_check_reports_missing(gender_dim):
    lo, _ = synthesize_personas(gender_dim)
    report = coverage_check([lo], gender_dim)
    assert not report.complete
    assert ("motivations", Extreme.MAX) in report.missing
    assert ("motivations", Extreme.MIN) in report.covered
