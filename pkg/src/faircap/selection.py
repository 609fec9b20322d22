"""Ruleset selection: metrics, constraint checks, greedy loop, exact oracle.

The ruleset aggregates follow worst-case semantics for the protected group:
a covered row contributes the best (max) covering-rule utility overall and
for the non-protected group, but the worst (min) covering-rule utility for
the protected group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .config import CoverageVariant, FairnessVariant, SelectionConfig
from .data import Dataset
from .errors import EmptyProtectedGroup, Infeasible, TooManyCandidates
from .interventions import PrescriptionRule, passes_individual_constraint

BRUTE_FORCE_CAP = 20


@dataclass(frozen=True)
class Violation:
    clause: str
    measured: float
    bound: float
    rule: str | None = None

    def describe(self) -> str:
        where = f" [{self.rule}]" if self.rule else ""
        return f"{self.clause}{where}: measured {self.measured:.6g} vs bound {self.bound:.6g}"


@dataclass(frozen=True)
class RulesetMetrics:
    size: int
    coverage_frac: float
    coverage_p_frac: float
    exp_utility: float
    exp_utility_p: float
    exp_utility_np: float
    unfairness: float


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    rule: str
    score: float
    coverage_term: float
    benefit_term: float
    utility_term: float
    exp_utility_after: float
    covered_after: int
    skipped_for_fairness: int


@dataclass(frozen=True)
class SelectionResult:
    rules: tuple[PrescriptionRule, ...]
    metrics: RulesetMetrics
    trace: tuple[IterationTrace, ...] = field(default_factory=tuple)


def _parts(rules: Sequence[PrescriptionRule], dataset: Dataset):
    indptr, indices = _kernels.build_csr([r.coverage.row_ids for r in rules])
    utils = np.asarray([r.utility for r in rules], dtype=np.float64)
    return _kernels.ruleset_utility_parts(indptr, indices, utils, dataset.protected_mask)


def exp_utility(rules: Sequence[PrescriptionRule], dataset: Dataset) -> float:
    """Average over all rows of the best covering-rule utility (0 uncovered)."""
    if not rules:
        return 0.0
    s_max, _, _, _, _, _ = _parts(rules, dataset)
    return s_max / dataset.n


def exp_utility_protected(
    rules: Sequence[PrescriptionRule],
    dataset: Dataset,
    denominator: str = "covered",
) -> float:
    """Average worst covering-rule utility over covered protected rows."""
    if not rules:
        return 0.0
    _, _, s_min_p, n_cov_p, _, _ = _parts(rules, dataset)
    if n_cov_p == 0:
        return 0.0
    denom = n_cov_p if denominator == "covered" else dataset.n_protected
    return s_min_p / denom if denom else 0.0


def exp_utility_nonprotected(
    rules: Sequence[PrescriptionRule], dataset: Dataset
) -> float:
    """Average best covering-rule utility over covered non-protected rows."""
    if not rules:
        return 0.0
    _, _, _, _, s_max_np, n_cov_np = _parts(rules, dataset)
    return s_max_np / n_cov_np if n_cov_np else 0.0


def ruleset_metrics(
    rules: Sequence[PrescriptionRule],
    dataset: Dataset,
    denominator: str = "covered",
) -> RulesetMetrics:
    if rules:
        s_max, n_cov, s_min_p, n_cov_p, s_max_np, n_cov_np = _parts(rules, dataset)
    else:
        s_max = s_min_p = s_max_np = 0.0
        n_cov = n_cov_p = n_cov_np = 0
    p_denom = n_cov_p if denominator == "covered" else dataset.n_protected
    e_all = s_max / dataset.n
    e_p = (s_min_p / p_denom) if (n_cov_p and p_denom) else 0.0
    e_np = (s_max_np / n_cov_np) if n_cov_np else 0.0
    return RulesetMetrics(
        size=len(rules),
        coverage_frac=n_cov / dataset.n,
        coverage_p_frac=(n_cov_p / dataset.n_protected) if dataset.n_protected else 0.0,
        exp_utility=e_all,
        exp_utility_p=e_p,
        exp_utility_np=e_np,
        unfairness=e_np - e_p,
    )


def satisfies_constraints(
    rules: Sequence[PrescriptionRule],
    dataset: Dataset,
    config: SelectionConfig,
) -> list[Violation]:
    """Evaluate every configured clause; empty list means satisfied."""
    fairness = config.fairness
    cov_mode = config.coverage
    if fairness.variant is not FairnessVariant.NONE and dataset.n_protected == 0:
        raise EmptyProtectedGroup(
            "a fairness constraint is configured but the protected pattern covers no rows"
        )
    violations: list[Violation] = []

    if rules:
        s_max, n_cov, s_min_p, n_cov_p, s_max_np, n_cov_np = _parts(rules, dataset)
    else:
        n_cov = n_cov_p = n_cov_np = 0
        s_min_p = s_max_np = 0.0

    if cov_mode.variant is CoverageVariant.GROUP:
        need = cov_mode.theta * dataset.n
        if n_cov < need:
            violations.append(Violation("group_coverage", float(n_cov), need))
        need_p = cov_mode.theta_p * dataset.n_protected
        if n_cov_p < need_p:
            violations.append(Violation("group_coverage_protected", float(n_cov_p), need_p))
    elif cov_mode.variant is CoverageVariant.RULE:
        need = cov_mode.theta * dataset.n
        need_p = cov_mode.theta_p * dataset.n_protected
        for r in rules:
            if r.coverage.count < need:
                violations.append(
                    Violation("rule_coverage", float(r.coverage.count), need, rule=r.text)
                )
            if r.coverage.protected_count < need_p:
                violations.append(
                    Violation(
                        "rule_coverage_protected",
                        float(r.coverage.protected_count),
                        need_p,
                        rule=r.text,
                    )
                )

    p_denom = n_cov_p if config.expu_denominator == "covered" else dataset.n_protected
    e_p = (s_min_p / p_denom) if (n_cov_p and p_denom) else 0.0
    e_np = (s_max_np / n_cov_np) if n_cov_np else 0.0

    if fairness.variant is FairnessVariant.SP_GROUP:
        gap = abs(e_p - e_np)
        if gap > fairness.epsilon:
            violations.append(Violation("sp_group", gap, fairness.epsilon))
    elif fairness.variant is FairnessVariant.SP_INDIVIDUAL:
        for r in rules:
            gap = abs(r.utility_p - r.utility_np)
            if gap > fairness.epsilon:
                violations.append(Violation("sp_individual", gap, fairness.epsilon, rule=r.text))
    elif fairness.variant is FairnessVariant.BGL_GROUP:
        if e_p < fairness.tau:
            violations.append(Violation("bgl_group", e_p, fairness.tau))
    elif fairness.variant is FairnessVariant.BGL_INDIVIDUAL:
        for r in rules:
            if r.utility_p < fairness.tau:
                violations.append(
                    Violation("bgl_individual", r.utility_p, fairness.tau, rule=r.text)
                )
    return violations


def objective(
    rules: Sequence[PrescriptionRule],
    l: int,
    dataset: Dataset,
    config: SelectionConfig,
) -> float:
    """lambda1 * (l - size) + lambda2 * expected utility."""
    if l < len(rules):
        raise ValueError("candidate count l must be >= ruleset size")
    return config.lambda1 * (l - len(rules)) + config.lambda2 * exp_utility(rules, dataset)


def _prefilter(
    candidates: Sequence[PrescriptionRule], dataset: Dataset, config: SelectionConfig
) -> list[PrescriptionRule]:
    """Per-rule constraints (individual fairness, rule coverage) gate entry."""
    out = []
    need = config.coverage.theta * dataset.n
    need_p = config.coverage.theta_p * dataset.n_protected
    for r in candidates:
        if not passes_individual_constraint(r, config.fairness):
            continue
        if config.coverage.variant is CoverageVariant.RULE and (
            r.coverage.count < need or r.coverage.protected_count < need_p
        ):
            continue
        out.append(r)
    return out


def _coverage_clauses_met(
    covered: np.ndarray, dataset: Dataset, config: SelectionConfig
) -> bool:
    if config.coverage.variant is not CoverageVariant.GROUP:
        return True  # rule-coverage holds per rule via the pre-filter
    n_cov = int(covered.sum())
    n_cov_p = int((covered & dataset.protected_mask).sum())
    return (
        n_cov >= config.coverage.theta * dataset.n
        and n_cov_p >= config.coverage.theta_p * dataset.n_protected
    )


def greedy_select(
    candidates: Sequence[PrescriptionRule],
    dataset: Dataset,
    config: SelectionConfig,
) -> SelectionResult:
    """Iteratively add the best-scoring rule until the marginal score fades.

    The score blends newly covered population (dropped once the configured
    coverage clauses hold), the fairness-penalized benefit, and the marginal
    expected utility, each normalized to the candidate pool. Under a group
    fairness mode, a candidate whose addition would break the group clause is
    skipped for that iteration once coverage goals are met. Raises Infeasible
    when the loop ends with configured clauses still violated.
    """
    if config.fairness.variant is not FairnessVariant.NONE and dataset.n_protected == 0:
        raise EmptyProtectedGroup(
            "a fairness constraint is configured but the protected pattern covers no rows"
        )
    pool = _prefilter(candidates, dataset, config)
    n = dataset.n
    max_benefit = max((r.benefit for r in pool), default=0.0)
    max_utility = max((r.utility for r in pool), default=0.0)
    b_norm = max_benefit if max_benefit > 0 else 1.0
    u_norm = max_utility if max_utility > 0 else 1.0

    chosen: list[PrescriptionRule] = []
    trace: list[IterationTrace] = []
    best_row_util = np.zeros(n)
    covered = np.zeros(n, dtype=bool)
    remaining = list(range(len(pool)))
    group_fair = config.fairness.variant in (
        FairnessVariant.SP_GROUP,
        FairnessVariant.BGL_GROUP,
    )

    while remaining and len(chosen) < config.max_rules:
        cov_met = _coverage_clauses_met(covered, dataset, config)
        indptr, indices = _kernels.build_csr([pool[i].coverage.row_ids for i in remaining])
        utils = np.asarray([pool[i].utility for i in remaining])
        gains, new_rows, new_prot = _kernels.candidate_stats(
            best_row_util, covered, dataset.protected_mask, indptr, indices, utils
        )

        best_j = -1
        best_key: tuple | None = None
        best_terms = (0.0, 0.0, 0.0)
        skipped = 0
        for j, i in enumerate(remaining):
            r = pool[i]
            if cov_met and group_fair:
                tentative = satisfies_constraints(chosen + [r], dataset, config)
                if any(v.clause in ("sp_group", "bgl_group") for v in tentative):
                    skipped += 1
                    continue
            if cov_met:
                cov_term = 0.0
            else:
                frac_all = new_rows[j] / n
                frac_p = (
                    new_prot[j] / dataset.n_protected if dataset.n_protected else frac_all
                )
                cov_term = 0.5 * (frac_all + frac_p)
            ben_term = r.benefit / b_norm
            util_term = (gains[j] / n) / u_norm
            score = (
                config.w_coverage * cov_term
                + config.w_benefit * ben_term
                + config.w_utility * util_term
            )
            key = (-score, -r.utility, -r.coverage.count, r.text)
            if best_key is None or key < best_key:
                best_j, best_key = j, key
                best_terms = (cov_term, ben_term, util_term)

        if best_j < 0:
            break
        score = -best_key[0]
        if score < config.stop_threshold:
            break
        i = remaining.pop(best_j)
        rule = pool[i]
        rows = rule.coverage.row_ids
        newly = ~covered[rows]
        covered[rows] = True
        best_row_util[rows[newly]] = rule.utility
        old = rows[~newly]
        best_row_util[old] = np.maximum(best_row_util[old], rule.utility)
        chosen.append(rule)
        trace.append(
            IterationTrace(
                iteration=len(chosen),
                rule=rule.text,
                score=score,
                coverage_term=best_terms[0],
                benefit_term=best_terms[1],
                utility_term=best_terms[2],
                exp_utility_after=exp_utility(chosen, dataset),
                covered_after=int(covered.sum()),
                skipped_for_fairness=skipped,
            )
        )

    violations = satisfies_constraints(chosen, dataset, config)
    metrics = ruleset_metrics(chosen, dataset, config.expu_denominator)
    if violations:
        raise Infeasible(violations, ruleset=chosen, metrics=metrics, trace=trace)
    return SelectionResult(rules=tuple(chosen), metrics=metrics, trace=tuple(trace))


def brute_force_select(
    candidates: Sequence[PrescriptionRule],
    dataset: Dataset,
    config: SelectionConfig,
) -> SelectionResult:
    """Exhaustive subset search; the exact oracle for small candidate pools."""
    m = len(candidates)
    if m > BRUTE_FORCE_CAP:
        raise TooManyCandidates(f"{m} candidates exceed the cap of {BRUTE_FORCE_CAP}")
    l = m
    best_subset: tuple[int, ...] | None = None
    best_key: tuple | None = None
    last_violations: list[Violation] = []
    for size in range(0, m + 1):
        for subset in combinations(range(m), size):
            rules = [candidates[i] for i in subset]
            violations = satisfies_constraints(rules, dataset, config)
            if violations:
                last_violations = violations
                continue
            obj = objective(rules, l, dataset, config)
            key = (-obj, len(subset), subset)
            if best_key is None or key < best_key:
                best_key, best_subset = key, subset
    if best_subset is None:
        raise Infeasible(last_violations or [Violation("no_valid_subset", 0.0, 0.0)])
    rules = tuple(candidates[i] for i in best_subset)
    return SelectionResult(
        rules=rules, metrics=ruleset_metrics(rules, dataset, config.expu_denominator)
    )
