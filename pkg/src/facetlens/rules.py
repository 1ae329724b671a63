"""Use cases, the rules text format, and extreme-value issue matching.

A use case is an ordered list of states, each carrying a flat attribute bag
of JSON scalars. A rule watches one facet extreme and fires on states whose
attributes satisfy its condition. `spot` asks "what goes wrong for a person
at this end of this scale, on this state"; `spot_bar` unions both ends of one
facet, which is the unit every higher-level evaluation decomposes into.

Rules text grammar (one rule per line, ``#`` starts a comment):

    rule_stmt := "rule" CODE ":" "facet" FACET_ID ("MIN"|"MAX")
                 "when" cond "=>" STRING ("severity" ("low"|"medium"|"high"))?
    cond      := or_expr
    or_expr   := and_expr ("or" and_expr)*
    and_expr  := not_expr ("and" not_expr)*
    not_expr  := "not" not_expr | atom
    atom      := "(" cond ")" | "has" "(" NAME ")" | NAME op literal
    op        := "=" | "!=" | "<" | "<=" | ">" | ">="
    literal   := STRING | NUMBER | "true" | "false"

Conditions never error at evaluation time: a comparison against an attribute
the state lacks is false, ``has`` of a missing attribute is false, and a
comparison across mismatched kinds (say a number against a string) is false.
Strings order lexicographically; booleans support only ``=`` and ``!=``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence

from .core import Extreme, FacetType, FacetValue, validate_id
from .errors import (
    BadId,
    DuplicateRuleCode,
    EmptyUseCase,
    ParseError,
)

SEVERITIES = ("low", "medium", "high")
_SEVERITY_RANK = {None: 0, "low": 1, "medium": 2, "high": 3}


# ---- use cases ----

@dataclass(frozen=True)
class State:
    """One step of a use case. ``index`` is its position in the parent list."""

    id: str
    index: int
    label: str
    attributes: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class UseCase:
    id: str
    label: str
    states: tuple[State, ...]

    def state(self, state_id: str) -> State:
        for s in self.states:
            if s.id == state_id:
                return s
        raise BadId(f"use case {self.id!r} has no state {state_id!r}")

    def state_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.states)

    def has_state(self, state_id: str) -> bool:
        return any(s.id == state_id for s in self.states)


def make_use_case(id: str, label: str, states: Sequence[State]) -> UseCase:
    """Build a validated use case; state indexes are assigned from position."""
    validate_id(id)
    if not states:
        raise EmptyUseCase(f"use case {id!r} has no states")
    seen: set[str] = set()
    indexed: list[State] = []
    for position, s in enumerate(states):
        validate_id(s.id)
        if s.id in seen:
            raise BadId(f"use case {id!r}: duplicate state id {s.id!r}")
        seen.add(s.id)
        indexed.append(
            State(id=s.id, index=position, label=s.label, attributes=dict(s.attributes))
        )
    return UseCase(id=id, label=label, states=tuple(indexed))


# ---- condition AST ----

class Condition:
    """Base class; subclasses are plain frozen dataclasses, so structural
    equality comes for free and round-trip tests can compare trees directly."""

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    # precedence for minimal-paren rendering: or < and < not < atom
    _prec = 4

    def _child(self, c: "Condition") -> str:
        return f"({c.render()})" if c._prec < self._prec else c.render()

    def _child_right(self, c: "Condition") -> str:
        # the parser is left-associative, so an equal-precedence right
        # child must keep its parens or reparse with a different shape
        return f"({c.render()})" if c._prec <= self._prec else c.render()


@dataclass(frozen=True)
class HasAttr(Condition):
    name: str
    _prec = 4

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        return self.name in attributes

    def render(self) -> str:
        return f"has({self.name})"


def _comparable(value: Any, literal: Any) -> bool:
    # bool is an int subclass; keep the kinds strictly apart.
    if isinstance(value, bool) or isinstance(literal, bool):
        return isinstance(value, bool) and isinstance(literal, bool)
    if isinstance(value, (int, float)) and isinstance(literal, (int, float)):
        return True
    return isinstance(value, str) and isinstance(literal, str)


@dataclass(frozen=True)
class Compare(Condition):
    name: str
    op: str
    literal: Any
    _prec = 4

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        if self.name not in attributes:
            return False
        value = attributes[self.name]
        if not _comparable(value, self.literal):
            return False
        if isinstance(value, bool) and self.op not in ("=", "!="):
            return False
        if self.op == "=":
            return value == self.literal
        if self.op == "!=":
            return value != self.literal
        if self.op == "<":
            return value < self.literal
        if self.op == "<=":
            return value <= self.literal
        if self.op == ">":
            return value > self.literal
        return value >= self.literal

    def render(self) -> str:
        if isinstance(self.literal, bool):
            lit = "true" if self.literal else "false"
        elif isinstance(self.literal, str):
            lit = json.dumps(self.literal, ensure_ascii=False)
        else:
            lit = repr(self.literal)
        return f"{self.name} {self.op} {lit}"


@dataclass(frozen=True)
class Not(Condition):
    operand: Condition
    _prec = 3

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        return not self.operand.evaluate(attributes)

    def render(self) -> str:
        return f"not {self._child(self.operand)}"


@dataclass(frozen=True)
class And(Condition):
    left: Condition
    right: Condition
    _prec = 2

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        return self.left.evaluate(attributes) and self.right.evaluate(attributes)

    def render(self) -> str:
        return f"{self._child(self.left)} and {self._child_right(self.right)}"


@dataclass(frozen=True)
class Or(Condition):
    left: Condition
    right: Condition
    _prec = 1

    def evaluate(self, attributes: Mapping[str, Any]) -> bool:
        return self.left.evaluate(attributes) or self.right.evaluate(attributes)

    def render(self) -> str:
        return f"{self._child(self.left)} or {self._child_right(self.right)}"


# ---- rules ----

@dataclass(frozen=True)
class Rule:
    """One extreme-watching heuristic. ``side`` is MIN or MAX, never NONE."""

    code: str
    facet_id: str
    side: Extreme
    condition: Condition
    message: str
    severity: Optional[str] = None

    def render(self) -> str:
        text = (
            f"rule {self.code} : facet {self.facet_id} {self.side.value} "
            f"when {self.condition.render()} "
            f"=> {json.dumps(self.message, ensure_ascii=False)}"
        )
        if self.severity is not None:
            text += f" severity {self.severity}"
        return text


@dataclass(frozen=True)
class RuleSet:
    id: str
    rules: tuple[Rule, ...] = ()

    def validate(self) -> "RuleSet":
        """Enforce code uniqueness (the parse/load boundary contract)."""
        seen: set[str] = set()
        for r in self.rules:
            if r.code in seen:
                raise DuplicateRuleCode(f"rule code {r.code!r} appears twice")
            seen.add(r.code)
        return self

    def rules_for(self, facet_id: str, side: Extreme) -> tuple[Rule, ...]:
        return tuple(
            r for r in self.rules if r.facet_id == facet_id and r.side is side
        )


# ---- tokenizer ----

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<op>=>|!=|<=|>=|=|<|>|\(|\)|:)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"rule", "facet", "when", "severity", "and", "or", "not", "has", "true", "false"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "string" | "number" | "ident" | "op" | "newline" | "end"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup or ""
        if kind not in ("ws", "comment"):
            if kind == "newline":
                tokens.append(_Token("newline", "\n", line, pos - line_start + 1))
                line += 1
                line_start = m.end()
            else:
                tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("end", "", line, pos - line_start + 1))
    return tokens


# ---- parser ----

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _fail(self, expected: str) -> "ParseError":
        got = self.current
        shown = "end of input" if got.kind == "end" else (
            "end of line" if got.kind == "newline" else repr(got.text)
        )
        return ParseError(f"expected {expected}, got {shown}", got.line, got.column)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Token]:
        tok = self.current
        if tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str, text: Optional[str] = None, what: str = "") -> _Token:
        tok = self.accept(kind, text)
        if tok is None:
            raise self._fail(what or text or kind)
        return tok

    def parse_file(self, ruleset_id: str) -> RuleSet:
        rules: list[Rule] = []
        while True:
            while self.accept("newline"):
                pass
            if self.current.kind == "end":
                break
            rules.append(self.parse_rule())
            if self.current.kind == "end":
                break
            self.expect("newline", what="end of line after rule")
        return RuleSet(id=ruleset_id, rules=tuple(rules)).validate()

    def parse_rule(self) -> Rule:
        self.expect("ident", "rule", what="'rule'")
        code_tok = self.expect("ident", what="rule code")
        self.expect("op", ":", what="':'")
        self.expect("ident", "facet", what="'facet'")
        facet_tok = self.expect("ident", what="facet id")
        side_tok = self.expect("ident", what="MIN or MAX")
        if side_tok.text not in ("MIN", "MAX"):
            raise ParseError(
                f"expected MIN or MAX, got {side_tok.text!r}",
                side_tok.line,
                side_tok.column,
            )
        self.expect("ident", "when", what="'when'")
        condition = self.parse_or()
        self.expect("op", "=>", what="'=>'")
        message_tok = self.expect("string", what="quoted message")
        severity: Optional[str] = None
        if self.accept("ident", "severity"):
            sev_tok = self.expect("ident", what="low, medium or high")
            if sev_tok.text not in SEVERITIES:
                raise ParseError(
                    f"severity must be one of {', '.join(SEVERITIES)}; "
                    f"got {sev_tok.text!r}",
                    sev_tok.line,
                    sev_tok.column,
                )
            severity = sev_tok.text
        return Rule(
            code=code_tok.text,
            facet_id=facet_tok.text,
            side=Extreme(side_tok.text),
            condition=condition,
            message=_unquote(message_tok.text),
            severity=severity,
        )

    def parse_or(self) -> Condition:
        node = self.parse_and()
        while self.accept("ident", "or"):
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Condition:
        node = self.parse_not()
        while self.accept("ident", "and"):
            node = And(node, self.parse_not())
        return node

    def parse_not(self) -> Condition:
        if self.accept("ident", "not"):
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self) -> Condition:
        if self.accept("op", "("):
            node = self.parse_or()
            self.expect("op", ")", what="')'")
            return node
        if self.accept("ident", "has"):
            self.expect("op", "(", what="'(' after has")
            name = self._attribute_name()
            self.expect("op", ")", what="')'")
            return HasAttr(name)
        name = self._attribute_name()
        op_tok = self.current
        if op_tok.kind != "op" or op_tok.text not in ("=", "!=", "<", "<=", ">", ">="):
            raise self._fail("comparison operator")
        self.pos += 1
        return Compare(name, op_tok.text, self._literal())

    def _attribute_name(self) -> str:
        tok = self.expect("ident", what="attribute name")
        if tok.text in _KEYWORDS:
            raise ParseError(
                f"{tok.text!r} is reserved and cannot name an attribute",
                tok.line,
                tok.column,
            )
        return tok.text

    def _literal(self) -> Any:
        tok = self.current
        if self.accept("string"):
            return _unquote(tok.text)
        if self.accept("number"):
            return float(tok.text) if "." in tok.text else int(tok.text)
        if self.accept("ident", "true"):
            return True
        if self.accept("ident", "false"):
            return False
        raise self._fail("literal (quoted string, number, true or false)")


def _unquote(raw: str) -> str:
    return json.loads(raw)


def parse_rules(text: str, id: str = "ruleset") -> RuleSet:
    """Parse rules text into a `RuleSet`.

    Raises:
        ParseError: syntax problem, with 1-based line and column.
        DuplicateRuleCode: two rules share a code.
    """
    return _Parser(_tokenize(text)).parse_file(id)


def serialize_rules(ruleset: RuleSet) -> str:
    """Render a rule set back to rules text.

    Comments are not part of the data model and are not preserved; parsing
    the output yields a structurally equal rule set.
    """
    return "".join(r.render() + "\n" for r in ruleset.rules)


# ---- issues ----

@dataclass(frozen=True)
class Issue:
    """One reported problem. Identity is (code, state_id); everything else is
    descriptive and merges when equal-identity issues meet in a union."""

    code: str
    state_id: str
    message: str
    provenance: frozenset[tuple[str, Extreme]] = frozenset()
    severity: Optional[str] = None

    @property
    def identity(self) -> tuple[str, str]:
        return (self.code, self.state_id)


def _merge_issue(a: Issue, b: Issue) -> Issue:
    # Symmetric in its arguments, so issue-set union stays commutative even
    # when two sessions describe the same finding differently.
    if a.message and b.message:
        message = min(a.message, b.message)
    else:
        message = a.message or b.message
    severity = max(a.severity, b.severity, key=_SEVERITY_RANK.__getitem__)
    return Issue(
        code=a.code,
        state_id=a.state_id,
        message=message,
        provenance=a.provenance | b.provenance,
        severity=severity,
    )


class IssueSet:
    """An immutable set of issues keyed by (code, state_id).

    Union merges colliding identities instead of picking a winner: provenance
    sets union, severity joins upward, and the message tie-breaks
    deterministically. That makes union commutative, associative and
    idempotent, which the composition guarantees downstream lean on.
    """

    __slots__ = ("_by_key",)

    def __init__(self, issues: Iterable[Issue] = ()):
        by_key: dict[tuple[str, str], Issue] = {}
        for issue in issues:
            key = issue.identity
            by_key[key] = _merge_issue(by_key[key], issue) if key in by_key else issue
        object.__setattr__(self, "_by_key", by_key)

    def union(self, *others: "IssueSet") -> "IssueSet":
        merged = list(self)
        for other in others:
            merged.extend(other)
        return IssueSet(merged)

    def __or__(self, other: "IssueSet") -> "IssueSet":
        return self.union(other)

    def identities(self) -> frozenset[tuple[str, str]]:
        return frozenset(self._by_key)

    def get(self, code: str, state_id: str) -> Optional[Issue]:
        return self._by_key.get((code, state_id))

    def for_state(self, state_id: str) -> tuple[Issue, ...]:
        return tuple(i for i in self if i.state_id == state_id)

    def __iter__(self) -> Iterator[Issue]:
        return iter(sorted(self._by_key.values(), key=lambda i: i.identity[::-1]))

    def __len__(self) -> int:
        return len(self._by_key)

    def __bool__(self) -> bool:
        return bool(self._by_key)

    def __contains__(self, key: object) -> bool:
        if isinstance(key, Issue):
            return key.identity in self._by_key
        return key in self._by_key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IssueSet):
            return NotImplemented
        return self._by_key == other._by_key

    def __hash__(self):  # pragma: no cover - sets of issue sets are not a thing
        return hash(frozenset(self._by_key.items()))

    def __repr__(self) -> str:
        return f"IssueSet({len(self._by_key)} issues)"


EMPTY_ISSUES = IssueSet()


# ---- matching ----

def spot(value: FacetValue, state: State, rules: RuleSet) -> IssueSet:
    """Issues for one facet value on one state.

    Rules fire only on extremes: an interior value matches nothing, by
    design, so sampled mid-scale profiles never manufacture findings.
    """
    if value.extreme is Extreme.NONE:
        return EMPTY_ISSUES
    found = []
    for rule in rules.rules:
        if rule.facet_id != value.facet_id or rule.side is not value.extreme:
            continue
        if rule.condition.evaluate(state.attributes):
            found.append(
                Issue(
                    code=rule.code,
                    state_id=state.id,
                    message=rule.message,
                    provenance=frozenset({(rule.facet_id, rule.side)}),
                    severity=rule.severity,
                )
            )
    return IssueSet(found)


def spot_bar(facet: FacetType, state: State, rules: RuleSet) -> IssueSet:
    """Both extremes of one facet on one state: spot(min) ∪ spot(max)."""
    return spot(facet.min_value, state, rules) | spot(facet.max_value, state, rules)
