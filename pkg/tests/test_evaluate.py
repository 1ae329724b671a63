import random

import pytest
from hypothesis import given, settings, strategies as st

from facetlens.core import Extreme, join, partition
from facetlens.errors import SchemaError, UnknownFacet, UseCaseMismatch
from facetlens.evaluate import (
    CellStatus,
    evaluate,
    merge_many,
    merge_results,
    sampling_baseline,
    verify_composition,
)

from .oracle import expected_identities, random_instance

# Frozen expected findings for the shipped fixtures. Derived once by direct
# enumeration (tests/oracle.py) and pinned so regressions surface as diffs.
FIXTURE_FINDINGS = frozenset(
    {
        ("access-challenge-widget", "account"),
        ("control-forced-account", "account"),
        ("cse-cryptic-errors", "account"),
        ("cse-help-hidden", "account"),
        ("ips-dense-unexplained", "account"),
        ("ips-no-progress-cue", "account"),
        ("lit-undefined-terms", "account"),
        ("ls-no-guided-path", "account"),
        ("ls-unsafe-tinkering", "account"),
        ("risk-no-undo", "account"),
        ("access-assumed-always-on", "confirmation"),
        ("access-heavy-assets", "confirmation"),
        ("control-no-next-choice", "confirmation"),
        ("lit-oversimplified", "confirmation"),
        ("motiv-nothing-to-explore", "confirmation"),
        ("access-heavy-assets", "landing"),
        ("cse-no-expert-path", "landing"),
        ("ips-no-progress-cue", "landing"),
        ("lit-no-glossary", "landing"),
        ("ls-no-guided-path", "landing"),
        ("motiv-heavy-detour", "landing"),
        ("control-forced-account", "payment"),
        ("cse-cryptic-errors", "payment"),
        ("cse-help-hidden", "payment"),
        ("ips-dense-unexplained", "payment"),
        ("lit-dense-jargon", "payment"),
        ("ls-no-guided-path", "payment"),
        ("ls-unsafe-tinkering", "payment"),
        ("risk-missing-warning", "payment"),
        ("risk-no-undo", "payment"),
        ("risk-skip-safeguards", "payment"),
    }
)


def test_fixture_findings_frozen(gender_dim, ses_dim, checkout, base_rules):
    result = evaluate(join(gender_dim, ses_dim), checkout, base_rules)
    assert result.issues.identities() == FIXTURE_FINDINGS
    assert expected_identities([gender_dim, ses_dim], checkout, base_rules) == FIXTURE_FINDINGS


def test_cost_is_two_facets_states(gender_dim, ses_dim, checkout, base_rules):
    joined = join(gender_dim, ses_dim)
    result = evaluate(joined, checkout, base_rules)
    assert result.spot_invocations == 2 * len(joined.facets) * len(checkout.states)
    assert result.spot_invocations == 64
    assert result.coverage.density == 1.0
    assert len(result.coverage) == 64
    assert all(
        cell.status is CellStatus.EVALUATED for _, cell in result.coverage.cells()
    )


def test_shared_facets_inspected_once(gender_dim, ses_dim, checkout, base_rules):
    separate = (
        evaluate(gender_dim, checkout, base_rules).spot_invocations
        + evaluate(ses_dim, checkout, base_rules).spot_invocations
    )
    joined = evaluate(join(gender_dim, ses_dim), checkout, base_rules).spot_invocations
    assert separate == 80
    assert joined == 64  # the two shared facets are spotted once, not twice


def test_parallel_matches_sequential(gender_dim, ses_dim, checkout, base_rules):
    joined = join(gender_dim, ses_dim)
    seq = evaluate(joined, checkout, base_rules)
    par = evaluate(joined, checkout, base_rules, max_workers=4)
    assert seq.same_findings(par)
    assert seq.spot_invocations == par.spot_invocations


def test_composition_on_fixtures(gender_dim, ses_dim, checkout, base_rules):
    report = verify_composition(gender_dim, ses_dim, checkout, base_rules)
    assert report.equal
    assert not report.only_joined and not report.only_merged


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_composition_on_random_instances(seed, force_shared):
    rng = random.Random(seed)
    a, b, use_case, rule_set = random_instance(rng, force_shared=force_shared)
    report = verify_composition(a, b, use_case, rule_set)
    assert report.equal, (report.only_joined, report.only_merged)
    # both sides must also agree with direct enumeration
    oracle = expected_identities([a, b], use_case, rule_set)
    assert report.joined.issues.identities() == oracle


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_partitions_merge_back(gender_dim, ses_dim, checkout, base_rules, seed):
    rng = random.Random(seed)
    joined = join(gender_dim, ses_dim)
    ids = list(joined.facet_ids())
    rng.shuffle(ids)
    k = rng.choice([2, 3])
    cuts = sorted(rng.sample(range(1, len(ids)), k - 1))
    groups = {}
    start = 0
    for i, cut in enumerate(list(cuts) + [len(ids)]):
        groups[f"part{i}"] = ids[start:cut]
        start = cut
    parts = partition(joined, groups)
    merged = merge_many(
        [evaluate(p, checkout, base_rules) for p in parts.values()]
    )
    full = evaluate(joined, checkout, base_rules)
    assert merged.same_findings(full)
    assert merged.issues.identities() == FIXTURE_FINDINGS


def test_merge_counts_and_status(gender_dim, ses_dim, checkout, base_rules):
    ra = evaluate(gender_dim, checkout, base_rules)
    rb = evaluate(ses_dim, checkout, base_rules)
    merged = merge_results(ra, rb)
    assert merged.spot_invocations == 80
    assert merged.inputs.dimension_ids == ("gender", "ses")
    assert merged.coverage.density == 1.0
    # merging a result with itself changes nothing observable
    assert merge_results(ra, ra).same_findings(ra)


def test_merge_rejects_mismatched_use_cases(gender_dim, checkout, base_rules):
    other = checkout.__class__(
        id="other", label="Other", states=checkout.states
    )
    ra = evaluate(gender_dim, checkout, base_rules)
    rb = evaluate(gender_dim, other, base_rules)
    with pytest.raises(UseCaseMismatch):
        merge_results(ra, rb)


def test_baseline_reproducible_and_bounded(gender_dim, ses_dim, checkout, base_rules):
    dims = [gender_dim, ses_dim]
    a = sampling_baseline(dims, checkout, base_rules, budget=64, seed=11)
    b = sampling_baseline(dims, checkout, base_rules, budget=64, seed=11)
    assert a.issues_found.identities() == b.issues_found.identities()
    assert a.occupied_cells == b.occupied_cells
    assert a.total_cells == 2 ** 8
    assert a.occupied_cells <= 64
    assert a.cell_density <= 64 / 256
    assert a.issues_found.identities() <= FIXTURE_FINDINGS


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 120))
def test_baseline_never_exceeds_type_based(gender_dim, ses_dim, checkout, base_rules, seed, budget):
    rep = sampling_baseline([gender_dim, ses_dim], checkout, base_rules, budget=budget, seed=seed)
    assert rep.issues_found.identities() <= FIXTURE_FINDINGS
    assert rep.occupied_cells <= min(budget, rep.total_cells)


def test_baseline_weight_validation(gender_dim, checkout, base_rules):
    with pytest.raises(UnknownFacet):
        sampling_baseline(
            [gender_dim], checkout, base_rules, budget=4, seed=1,
            level_weights={"nope": [1.0, 1.0]},
        )
    with pytest.raises(SchemaError):
        sampling_baseline(
            [gender_dim], checkout, base_rules, budget=4, seed=1,
            level_weights={"motivations": [1.0]},
        )


def test_weighted_baseline_shifts_sampling(gender_dim, checkout, base_rules):
    # all weight on interior levels of the long scale: its rules cannot fire
    weights = {"computer-self-efficacy": [0.0, 1.0, 1.0, 1.0, 0.0]}
    rep = sampling_baseline(
        [gender_dim], checkout, base_rules, budget=400, seed=5, level_weights=weights
    )
    assert not any(code.startswith("cse-") for code, _ in rep.issues_found.identities())
