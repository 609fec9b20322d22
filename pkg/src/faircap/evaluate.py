"""Experiment matrix over selection variants plus human-readable reporting."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .config import CoverageVariant, FairnessVariant, SelectionConfig
from .dag import CausalDag
from .data import AttributeSpec, Dataset
from .errors import EmptyProtectedGroup, NoPatterns
from .interventions import PrescriptionRule
from .pipeline import PipelineConfig, run_pipeline
from .selection import RulesetMetrics, Violation

_EMPTY_METRICS = RulesetMetrics(
    size=0,
    coverage_frac=0.0,
    coverage_p_frac=0.0,
    exp_utility=0.0,
    exp_utility_p=0.0,
    exp_utility_np=0.0,
    unfairness=0.0,
)


@dataclass(frozen=True)
class ExperimentRow:
    label: str
    metrics: RulesetMetrics
    runtime_ms: float
    infeasible: bool = False
    violations: tuple[Violation, ...] = ()


def variant_label(config: SelectionConfig) -> str:
    fairness = {
        FairnessVariant.NONE: None,
        FairnessVariant.SP_GROUP: "group fairness (SP)",
        FairnessVariant.SP_INDIVIDUAL: "individual fairness (SP)",
        FairnessVariant.BGL_GROUP: "group fairness (BGL)",
        FairnessVariant.BGL_INDIVIDUAL: "individual fairness (BGL)",
    }[config.fairness.variant]
    cov = {
        CoverageVariant.NONE: None,
        CoverageVariant.GROUP: "group coverage",
        CoverageVariant.RULE: "rule coverage",
    }[config.coverage.variant]
    parts = [p for p in (cov, fairness) if p]
    return ", ".join(parts) if parts else "no constraints"


def run_variant_matrix(
    dataset: Dataset,
    dag: CausalDag,
    configs: Sequence[SelectionConfig],
    *,
    mining=None,
    jobs: int = 1,
    labels: Sequence[str] | None = None,
) -> list[ExperimentRow]:
    """Full pipeline once per config; rows share one estimate cache.

    Per-row infeasibility is recorded and the matrix continues.
    """
    if not configs:
        raise ValueError("need at least one selection config")
    from .config import MiningConfig

    mining = mining or MiningConfig()
    cache: dict = {}
    rows: list[ExperimentRow] = []
    for idx, sel in enumerate(configs):
        label = labels[idx] if labels else variant_label(sel)
        cfg = PipelineConfig(mining=mining, selection=sel)
        start = time.perf_counter()
        try:
            out = run_pipeline(dataset, dag, cfg, jobs=jobs, cache=cache)
        except (EmptyProtectedGroup, NoPatterns) as exc:
            rows.append(
                ExperimentRow(
                    label=label,
                    metrics=_EMPTY_METRICS,
                    runtime_ms=(time.perf_counter() - start) * 1e3,
                    infeasible=True,
                    violations=(Violation("setup", 0.0, 0.0, rule=str(exc)),),
                )
            )
            continue
        elapsed_ms = (time.perf_counter() - start) * 1e3
        metrics = out.result.metrics if out.result is not None else _EMPTY_METRICS
        rows.append(
            ExperimentRow(
                label=label,
                metrics=metrics,
                runtime_ms=elapsed_ms,
                infeasible=out.infeasible,
                violations=out.violations,
            )
        )
    return rows


def render_rule(rule: PrescriptionRule, schema: Sequence[AttributeSpec]) -> str:
    """Natural-language template for one rule, values rounded to 2 decimals."""
    if rule.grouping.predicates:
        conds = " and ".join(
            f"{p.attribute} {p.op} {p.value}" for p in rule.grouping.predicates
        )
        head = f"For individuals with {conds}"
    else:
        head = "For all individuals"
    actions = ", ".join(
        f"{p.attribute} = {p.value}" for p in rule.intervention.predicates
    )
    return (
        f"{head}, set {actions} "
        f"(exp utility protected: {rule.utility_p:.2f}, "
        f"non-protected: {rule.utility_np:.2f})."
    )


_COLUMNS = (
    "variant",
    "# rules",
    "coverage",
    "coverage pro",
    "exp utility",
    "exp utility non-pro",
    "exp utility pro",
    "unfairness",
    "runtime ms",
)


def markdown_table(rows: Sequence[ExperimentRow]) -> str:
    lines = [
        "| " + " | ".join(_COLUMNS) + " |",
        "|" + "|".join("---" for _ in _COLUMNS) + "|",
    ]
    for row in rows:
        m = row.metrics
        label = row.label + (" (infeasible)" if row.infeasible else "")
        lines.append(
            "| "
            + " | ".join(
                [
                    label,
                    str(m.size),
                    f"{100 * m.coverage_frac:.2f}%",
                    f"{100 * m.coverage_p_frac:.2f}%",
                    f"{m.exp_utility:.2f}",
                    f"{m.exp_utility_np:.2f}",
                    f"{m.exp_utility_p:.2f}",
                    f"{m.unfairness:.2f}",
                    f"{row.runtime_ms:.0f}",
                ]
            )
            + " |"
        )
    return "\n".join(lines) + "\n"
