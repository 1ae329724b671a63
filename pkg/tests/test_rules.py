import random

import pytest
from hypothesis import given, settings, strategies as st

from facetlens.core import Extreme, make_facet_type
from facetlens.errors import DuplicateRuleCode, ParseError
from facetlens.rules import (
    EMPTY_ISSUES,
    Compare,
    HasAttr,
    Issue,
    IssueSet,
    Not,
    Or,
    parse_rules,
    serialize_rules,
    spot,
    spot_bar,
)

from .oracle import eval_condition, random_condition

SAMPLE = """
# heuristics for a toy flow
rule low-help : facet self-trust MIN when help_visible = false => "Help is hidden." severity high
rule max-skip : facet self-trust MAX when steps < 2 and not has(undo_available) => "Expert path skips safeguards."
rule str-cmp : facet style MIN when layout >= "m" or jargon != 0 => "Dense layout, dense words." severity low
"""


def test_parse_and_serialize_round_trip():
    rs = parse_rules(SAMPLE, id="toy")
    assert [r.code for r in rs.rules] == ["low-help", "max-skip", "str-cmp"]
    text = serialize_rules(rs)
    again = parse_rules(text, id="toy")
    assert again == rs
    assert serialize_rules(again) == text


def test_parse_reports_position():
    with pytest.raises(ParseError) as err:
        parse_rules('rule a : facet f MIN when => "m"')
    assert err.value.line == 1
    assert err.value.column > 0
    with pytest.raises(ParseError):
        parse_rules('rule a : facet f SIDEWAYS when has(x) => "m"')
    with pytest.raises(ParseError):
        parse_rules('rule a : facet f MIN when has(x) => "m" severity terrible')
    with pytest.raises(ParseError):
        parse_rules('rule a : facet f MIN when x = 1 => "m" rule b : facet f MIN when x = 1 => "n"')


def test_duplicate_codes_rejected_at_parse():
    text = 'rule a : facet f MIN when has(x) => "m"\nrule a : facet g MAX when has(y) => "n"'
    with pytest.raises(DuplicateRuleCode):
        parse_rules(text)


def test_condition_semantics():
    rs = parse_rules(
        'rule r : facet f MIN when jargon > 2 and not (mode = "dense" or missing != 5) => "x"'
    )
    cond = rs.rules[0].condition
    assert cond.evaluate({"jargon": 3, "mode": "plain"})
    assert not cond.evaluate({"jargon": 3, "mode": "dense"})
    assert not cond.evaluate({"jargon": 3, "mode": "plain", "missing": 4})
    assert not cond.evaluate({"jargon": 1, "mode": "plain"})
    # an absent attribute never satisfies a comparison
    assert not cond.evaluate({"mode": "plain"})


def test_mixed_kinds_never_compare():
    c = Compare("x", "=", 1)
    assert not c.evaluate({"x": True})
    assert not c.evaluate({"x": "1"})
    assert c.evaluate({"x": 1})
    b = Compare("x", "<", True)
    assert not b.evaluate({"x": False})
    assert Compare("x", "!=", True).evaluate({"x": False})
    assert Compare("name", ">", "m").evaluate({"name": "z"})


def test_precedence_not_and_or():
    rs = parse_rules('rule r : facet f MIN when not has(a) and has(b) or has(c) => "x"')
    cond = rs.rules[0].condition
    assert isinstance(cond, Or)
    assert cond.evaluate({"c": 1})
    assert cond.evaluate({"b": 1})
    assert not cond.evaluate({"a": 1, "b": 1})


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_conditions_round_trip_and_agree(seed):
    rng = random.Random(seed)
    cond = random_condition(rng)
    rs = parse_rules(f'rule r : facet f MIN when {cond.render()} => "m"')
    assert rs.rules[0].condition == cond
    for _ in range(5):
        attrs = {
            name: rng.choice([rng.randint(0, 5), True, False, "plain", "dense"])
            for name in ["steps", "jargon", "undo", "help", "mode", "load", "turns", "noise"]
            if rng.random() < 0.7
        }
        assert cond.evaluate(attrs) == eval_condition(cond, attrs)


def _issue(code, state, msg="m", prov=(("f", Extreme.MIN),), sev=None):
    return Issue(code, state, msg, frozenset(prov), sev)


def test_issue_merge_rules():
    a = _issue("c", "s", "alpha", (("f", Extreme.MIN),), "low")
    b = _issue("c", "s", "beta", (("g", Extreme.MAX),), "high")
    merged = (IssueSet([a]) | IssueSet([b])).get("c", "s")
    assert merged.severity == "high"
    assert merged.message == "alpha"  # lexicographic min of the non-empty pool
    assert merged.provenance == frozenset({("f", Extreme.MIN), ("g", Extreme.MAX)})
    empty_msg = _issue("c", "s", "", (("h", Extreme.MIN),), None)
    again = (IssueSet([merged]) | IssueSet([empty_msg])).get("c", "s")
    assert again.message == "alpha"
    assert again.severity == "high"
    assert len(again.provenance) == 3


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_issue_set_union_laws(seed):
    rng = random.Random(seed)

    def pool():
        issues = []
        for _ in range(rng.randint(0, 6)):
            issues.append(
                _issue(
                    f"c{rng.randint(0, 3)}",
                    f"s{rng.randint(0, 2)}",
                    rng.choice(["", "a", "b"]),
                    ((f"f{rng.randint(0, 2)}", rng.choice([Extreme.MIN, Extreme.MAX])),),
                    rng.choice([None, "low", "medium", "high"]),
                )
            )
        return IssueSet(issues)

    x, y, z = pool(), pool(), pool()
    assert x | y == y | x
    assert (x | y) | z == x | (y | z)
    assert x | x == x
    assert x | EMPTY_ISSUES == x


def test_spot_only_fires_on_extremes():
    facet = make_facet_type("f", "F", ("a", "b", "c"))
    rs = parse_rules('rule r : facet f MIN when has(x) => "m"\nrule q : facet f MAX when has(x) => "n"')
    state_attrs = {"x": 1}

    class StateStub:
        id = "s"
        attributes = state_attrs

    assert spot(facet.value_at(1), StateStub, rs) == EMPTY_ISSUES
    low = spot(facet.value_at(0), StateStub, rs)
    assert {i.code for i in low} == {"r"}
    both = spot_bar(facet, StateStub, rs)
    assert {i.code for i in both} == {"r", "q"}
    assert both == spot(facet.value_at(0), StateStub, rs) | spot(facet.value_at(2), StateStub, rs)


def test_unknown_attributes_are_benign():
    rs = parse_rules('rule r : facet f MIN when has(nothing) or nothing > 3 => "m"')
    assert not rs.rules[0].condition.evaluate({})


def test_ruleset_lookup(base_rules):
    mins = base_rules.rules_for("attitude-toward-risk", Extreme.MIN)
    assert mins and all(r.side is Extreme.MIN for r in mins)
    assert not base_rules.rules_for("no-such-facet", Extreme.MIN)


def test_messages_with_escapes_round_trip():
    text = 'rule r : facet f MIN when has(x) => "say \\"hi\\" \\\\ twice"'
    rs = parse_rules(text)
    assert rs.rules[0].message == 'say "hi" \\ twice'
    assert parse_rules(serialize_rules(rs)) == rs
