"""Derived documents: facet surveys, persona cards, and result reports.

Everything here is rendering over already-computed domain objects, with one
shared obligation: identical inputs produce byte-identical output, so nothing
in this module may consult the clock, the filesystem, or iteration orders
that are not pinned.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Dimension, Extreme, Persona, join_many, synthesize_personas
from .errors import BadId
from .evaluate import CellStatus, EvalResult, merge_many
from .rules import Issue

# ---- surveys ----

_PROMPTS = (
    "Where do you place yourself between '{min}' and '{max}' on {label}?",
    "Thinking of the last software you used for real work, which end of "
    "{label} described you: '{min}' or '{max}'?",
    "When something goes wrong mid-task, toward which end of {label} does "
    "your reaction move: '{min}' or '{max}'?",
)


@dataclass(frozen=True)
class SurveyQuestion:
    facet_id: str
    facet_label: str
    ordinal: int  # 1-based within the facet
    prompt: str
    options: tuple[str, ...]


@dataclass(frozen=True)
class Survey:
    id: str
    dimension_ids: tuple[str, ...]
    questions: tuple[SurveyQuestion, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["facet_id", "facet_label", "ordinal", "prompt", "options"])
        for q in self.questions:
            writer.writerow(
                [q.facet_id, q.facet_label, q.ordinal, q.prompt, "|".join(q.options)]
            )
        return buf.getvalue()


def generate_survey(
    dims: Sequence[Dimension], questions_per_facet: int = 1
) -> Survey:
    """Build a self-location survey over the joined facet set.

    Question count is ``questions_per_facet * |joined facets|``: the cost of
    asking grows with the number of facets, not with the number of dimension
    combinations. Shared facets are asked once.
    """
    if questions_per_facet < 1:
        raise BadId(f"questions_per_facet must be >= 1, got {questions_per_facet}")
    joined = join_many(list(dims))
    questions: list[SurveyQuestion] = []
    for facet in joined.facets:
        for ordinal in range(1, questions_per_facet + 1):
            template = _PROMPTS[(ordinal - 1) % len(_PROMPTS)]
            prompt = template.format(
                min=facet.min_level, max=facet.max_level, label=facet.label
            )
            if ordinal > len(_PROMPTS):
                prompt = f"(variant {ordinal}) {prompt}"
            questions.append(
                SurveyQuestion(
                    facet_id=facet.id,
                    facet_label=facet.label,
                    ordinal=ordinal,
                    prompt=prompt,
                    options=facet.scale,
                )
            )
    return Survey(
        id=f"survey-{joined.id.replace('+', '-')}",
        dimension_ids=tuple(sorted(set().union(*(d.atomic_ids() for d in dims)))),
        questions=tuple(questions),
    )


# ---- persona cards ----

@dataclass(frozen=True)
class PersonaCard:
    persona: Persona
    dimension_label: str
    lines: tuple[tuple[str, str], ...]  # (facet label, level label)

    def to_markdown(self) -> str:
        out = [f"### {self.persona.name}", ""]
        out.append(f"Dimension: {self.dimension_label}")
        out.append("")
        for facet_label, level in self.lines:
            out.append(f"- {facet_label}: **{level}**")
        out.append("")
        return "\n".join(out)


def _card(d: Dimension, persona: Persona) -> PersonaCard:
    lines = []
    for facet in d.facets:
        value = persona.value_for(facet.id)
        lines.append((facet.label, facet.scale[value.level_index]))
    return PersonaCard(persona=persona, dimension_label=d.label, lines=tuple(lines))


def persona_cards(dims: Sequence[Dimension]) -> tuple[PersonaCard, ...]:
    """Two cards per dimension, one per end of every scale.

    Pass ``[join_many(dims)]`` instead to get the pair for a joined scope.
    """
    cards: list[PersonaCard] = []
    for d in dims:
        low, high = synthesize_personas(
            d, name_min=f"{d.label}: low ends", name_max=f"{d.label}: high ends"
        )
        cards.append(_card(d, low))
        cards.append(_card(d, high))
    return tuple(cards)


def render_cards(cards: Sequence[PersonaCard]) -> str:
    return "\n".join(c.to_markdown() for c in cards)


# ---- reports ----

def _issue_sort_key(result: EvalResult, issue: Issue) -> tuple:
    state_index = result.state_ids.index(issue.state_id)
    facets = sorted(fid for fid, _ in issue.provenance)
    return (state_index, facets[0] if facets else "", issue.code)


def _provenance_text(issue: Issue) -> str:
    return "; ".join(
        f"{fid}:{side.value}" for fid, side in sorted(issue.provenance)
    )


def compose_report(results: Sequence[EvalResult], format: str = "md") -> str:
    """Render one or more results (merged first) as markdown or CSV.

    The issue table sorts by (state index, facet id, code). Output depends
    only on the inputs, so two runs over equal results are byte-identical.
    """
    if format not in ("md", "csv"):
        raise BadId(f"report format must be 'md' or 'csv', got {format!r}")
    merged = merge_many(list(results))
    ordered = sorted(merged.issues, key=lambda i: _issue_sort_key(merged, i))
    if format == "csv":
        return _report_csv(merged, ordered)
    return _report_markdown(merged, ordered)


def _report_csv(result: EvalResult, ordered: Sequence[Issue]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["state_index", "state_id", "code", "facets", "severity", "message"]
    )
    for issue in ordered:
        writer.writerow(
            [
                result.state_ids.index(issue.state_id),
                issue.state_id,
                issue.code,
                _provenance_text(issue),
                issue.severity or "",
                issue.message,
            ]
        )
    return buf.getvalue()


def _report_markdown(result: EvalResult, ordered: Sequence[Issue]) -> str:
    cov = result.coverage
    evaluated = sum(
        1 for _, cell in cov.cells() if cell.status is CellStatus.EVALUATED
    )
    lines: list[str] = ["# Evaluation report", ""]

    lines.append("## Inputs")
    lines.append("")
    lines.append(f"- Dimensions: {', '.join(result.inputs.dimension_ids)}")
    lines.append(f"- Use case: {result.inputs.use_case_id}")
    if result.inputs.rule_set_ids:
        lines.append(f"- Rule sets: {', '.join(result.inputs.rule_set_ids)}")
    if result.inputs.session_ids:
        lines.append(f"- Sessions: {', '.join(result.inputs.session_ids)}")
    lines.append("")

    lines.append("## Coverage")
    lines.append("")
    lines.append(
        f"- Cells evaluated: {evaluated} of {len(cov)} (density {cov.density:.3f})"
    )
    lines.append(f"- Issues: {len(result.issues)}")
    lines.append("")
    pending = [
        key for key, cell in cov.cells() if cell.status is CellStatus.PENDING
    ]
    if pending:
        lines.append("### Pending cells")
        lines.append("")
        for facet_id, side, state_id in pending:
            lines.append(f"- {facet_id} {side.value} @ {state_id}")
        lines.append("")

    lines.append("## Findings by state")
    lines.append("")
    for state_id in result.state_ids:
        state_issues = [i for i in ordered if i.state_id == state_id]
        lines.append(f"### {state_id} ({len(state_issues)} issues)")
        lines.append("")
        if state_issues:
            lines.append("| Code | Facets | Severity | Message |")
            lines.append("| --- | --- | --- | --- |")
            for issue in state_issues:
                lines.append(
                    f"| {issue.code} | {_provenance_text(issue)} "
                    f"| {issue.severity or '-'} | {issue.message} |"
                )
            lines.append("")
        else:
            lines.append("No findings.")
            lines.append("")

    lines.append("## Facet summary")
    lines.append("")
    lines.append("| Facet | Side | Issues |")
    lines.append("| --- | --- | --- |")
    per_side: dict[tuple[str, Extreme], int] = {}
    for issue in ordered:
        for fid, side in issue.provenance:
            per_side[(fid, side)] = per_side.get((fid, side), 0) + 1
    for (fid, side), count in sorted(per_side.items()):
        lines.append(f"| {fid} | {side.value} | {count} |")
    lines.append("")
    return "\n".join(lines)
