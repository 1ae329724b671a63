"""facetlens: type-level inclusivity evaluation.

Walks the extremes of facet-type scales instead of sampling users, so that
evaluating a composed analysis costs the sum of its parts rather than the
product of their value spaces.
"""

from .core import (
    Dimension,
    Extreme,
    FacetType,
    FacetValue,
    Persona,
    PersonaCoverageReport,
    coverage_check,
    join,
    join_many,
    make_dimension,
    make_facet_type,
    make_persona,
    partition,
    synthesize_personas,
)
from .errors import FacetLensError
from .evaluate import (
    BaselineReport,
    CellState,
    CellStatus,
    CoverageMatrix,
    EvalResult,
    ResultInputs,
    VerificationReport,
    evaluate,
    merge_many,
    merge_results,
    sampling_baseline,
    verify_composition,
)
from .rules import (
    Issue,
    IssueSet,
    Rule,
    RuleSet,
    State,
    UseCase,
    make_use_case,
    parse_rules,
    serialize_rules,
    spot,
    spot_bar,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineReport",
    "CellState",
    "CellStatus",
    "CoverageMatrix",
    "Dimension",
    "EvalResult",
    "Extreme",
    "FacetLensError",
    "FacetType",
    "FacetValue",
    "Issue",
    "IssueSet",
    "Persona",
    "PersonaCoverageReport",
    "ResultInputs",
    "Rule",
    "RuleSet",
    "State",
    "UseCase",
    "VerificationReport",
    "coverage_check",
    "evaluate",
    "join",
    "join_many",
    "make_dimension",
    "make_facet_type",
    "make_persona",
    "make_use_case",
    "merge_many",
    "merge_results",
    "parse_rules",
    "partition",
    "sampling_baseline",
    "serialize_rules",
    "spot",
    "spot_bar",
    "synthesize_personas",
    "verify_composition",
    "__version__",
]
