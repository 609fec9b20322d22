"""End-to-end mining pipeline: grouping mine -> intervention mine -> selection.

Intervention mining across grouping patterns is embarrassingly parallel; with
``jobs > 1`` it runs on a fork-based process pool. Results are collected in
submission order, so the output is identical at any worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import CoverageVariant, FairnessMode, MiningConfig, SelectionConfig
from .dag import CausalDag, causally_relevant_attributes, validate_dag
from .data import Dataset, Role
from .errors import Infeasible, NoPatterns
from .interventions import PrescriptionRule, mine_intervention
from .mining import GroupingCandidate, mine_grouping_patterns
from .selection import (
    SelectionResult,
    Violation,
    greedy_select,
    ruleset_metrics,
)

log = logging.getLogger("faircap.pipeline")


@dataclass(frozen=True)
class PipelineConfig:
    mining: MiningConfig = field(default_factory=MiningConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)


@dataclass(frozen=True)
class PipelineResult:
    candidates: tuple[PrescriptionRule, ...]
    result: SelectionResult | None
    violations: tuple[Violation, ...]

    @property
    def infeasible(self) -> bool:
        return len(self.violations) > 0


def effective_apriori_support(cfg: PipelineConfig) -> float:
    """Under rule coverage the Apriori threshold also guards theta."""
    if cfg.selection.coverage.variant is CoverageVariant.RULE:
        return max(cfg.mining.apriori_support, cfg.selection.coverage.theta)
    return cfg.mining.apriori_support


# Worker-process state for the pool path (fork start method inherits these,
# the initializer covers spawn-style pools too).
_POOL_STATE: dict = {}


def _init_worker(dataset: Dataset, dag: CausalDag) -> None:
    _POOL_STATE["dataset"] = dataset
    _POOL_STATE["dag"] = dag
    _POOL_STATE["cache"] = {}


def _mine_one(args) -> PrescriptionRule | None:
    grouping, mode, mining_cfg = args
    return mine_intervention(
        _POOL_STATE["dataset"],
        _POOL_STATE["dag"],
        grouping,
        mode,
        mining_cfg,
        cache=_POOL_STATE["cache"],
    )


def mine_candidates(
    dataset: Dataset,
    dag: CausalDag,
    cfg: PipelineConfig,
    *,
    groupings: list[GroupingCandidate] | None = None,
    jobs: int = 1,
    cache: dict | None = None,
    pool: ProcessPoolExecutor | None = None,
) -> list[PrescriptionRule]:
    """One best intervention per grouping pattern; Nones dropped."""
    if groupings is None:
        relevant = causally_relevant_attributes(dag, dataset.outcome_name)
        groupings = mine_grouping_patterns(
            dataset,
            relevant & set(dataset.attributes_with_role(Role.IMMUTABLE)),
            apriori_support=effective_apriori_support(cfg),
            max_len=cfg.mining.max_grouping_len,
        )
    mode = cfg.selection.fairness
    if jobs > 1 or pool is not None:
        owned = pool is None
        if owned:
            pool = ProcessPoolExecutor(
                max_workers=jobs, initializer=_init_worker, initargs=(dataset, dag)
            )
        try:
            tasks = [(g.pattern, mode, cfg.mining) for g in groupings]
            results = list(pool.map(_mine_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs) or 1)))
        finally:
            if owned:
                pool.shutdown()
    else:
        results = [
            mine_intervention(dataset, dag, g.pattern, mode, cfg.mining, cache=cache)
            for g in groupings
        ]
    return [r for r in results if r is not None]


def run_pipeline(
    dataset: Dataset,
    dag: CausalDag,
    cfg: PipelineConfig,
    *,
    jobs: int = 1,
    cache: dict | None = None,
    pool: ProcessPoolExecutor | None = None,
) -> PipelineResult:
    """Validate the DAG, mine candidates, select a ruleset."""
    validate_dag(dag, dataset.schema)
    try:
        candidates = mine_candidates(
            dataset, dag, cfg, jobs=jobs, cache=cache, pool=pool
        )
    except NoPatterns as exc:
        return PipelineResult(
            candidates=(),
            result=None,
            violations=(Violation("no_grouping_patterns", 0.0, 0.0, rule=str(exc)),),
        )
    log.info("mined %d candidate rules", len(candidates))
    try:
        result = greedy_select(candidates, dataset, cfg.selection)
    except Infeasible as exc:
        return PipelineResult(
            candidates=tuple(candidates),
            result=SelectionResult(
                rules=tuple(exc.ruleset),
                metrics=exc.metrics
                or ruleset_metrics(exc.ruleset, dataset, cfg.selection.expu_denominator),
                trace=tuple(exc.trace),
            ),
            violations=tuple(exc.violations),
        )
    return PipelineResult(candidates=tuple(candidates), result=result, violations=())
