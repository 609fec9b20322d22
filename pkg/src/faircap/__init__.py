"""Causal prescription-rule mining with coverage and fairness constraints."""

from .config import (
    CoverageMode,
    CoverageVariant,
    FairnessMode,
    FairnessVariant,
    MiningConfig,
    SelectionConfig,
)
from .dag import (
    CausalDag,
    DagKind,
    adjustment_set,
    causally_relevant_attributes,
    generate_simplified_dag,
    validate_dag,
)
from .data import (
    AttributeSpec,
    Categorical,
    CoverageSet,
    Dataset,
    Numeric,
    Pattern,
    Predicate,
    Role,
    coverage,
    evaluate_predicate,
    pattern_refines,
)
from .cate import CateEstimate, estimate_cate
from .interventions import (
    PrescriptionRule,
    benefit_bgl,
    benefit_sp,
    mine_intervention,
    rule_utilities,
)
from .mining import GroupingCandidate, mine_grouping_patterns
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .selection import (
    RulesetMetrics,
    SelectionResult,
    brute_force_select,
    exp_utility,
    exp_utility_nonprotected,
    exp_utility_protected,
    greedy_select,
    objective,
    ruleset_metrics,
    satisfies_constraints,
)
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "Categorical",
    "CateEstimate",
    "CausalDag",
    "CoverageMode",
    "CoverageSet",
    "CoverageVariant",
    "DagKind",
    "Dataset",
    "FairnessMode",
    "FairnessVariant",
    "GroupingCandidate",
    "MiningConfig",
    "Numeric",
    "Pattern",
    "PipelineConfig",
    "PipelineResult",
    "Predicate",
    "PrescriptionRule",
    "Role",
    "RulesetMetrics",
    "SelectionConfig",
    "SelectionResult",
    "SyntheticSpec",
    "adjustment_set",
    "benefit_bgl",
    "benefit_sp",
    "brute_force_select",
    "causally_relevant_attributes",
    "coverage",
    "estimate_cate",
    "evaluate_predicate",
    "exp_utility",
    "exp_utility_nonprotected",
    "exp_utility_protected",
    "generate_simplified_dag",
    "generate_synthetic",
    "greedy_select",
    "mine_grouping_patterns",
    "mine_intervention",
    "objective",
    "pattern_refines",
    "rule_utilities",
    "ruleset_metrics",
    "run_pipeline",
    "satisfies_constraints",
    "validate_dag",
]
