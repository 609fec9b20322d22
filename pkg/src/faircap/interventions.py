"""Intervention mining: per grouping pattern, find the best treatment.

The intervention lattice is traversed top-down. Level-1 nodes are single
assignments ``attr = value``; a level k+1 node is the union of two surviving
level-k nodes that agree on all but one predicate (on distinct attributes),
admitted only when every length-k sub-pattern survived. Survival means a
positive effect estimate that clears the significance gate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from itertools import combinations, product

import numpy as np

from .cate import cate_on_rows
from .config import FairnessMode, FairnessVariant, MiningConfig
from .dag import CausalDag, causally_relevant_attributes
from .data import CoverageSet, Dataset, Pattern, Predicate, Role, coverage
from .errors import PositivityViolation, SingularDesign

log = logging.getLogger("faircap.interventions")

Assignment = tuple[str, str]  # (mutable attribute, value label)


@dataclass(frozen=True, eq=False)
class PrescriptionRule:
    """A (grouping, intervention) pair with its cached effect statistics.

    ``utility`` is the overall effect estimate, ``utility_p``/``utility_np``
    the estimates on the protected and non-protected parts of the coverage,
    and ``benefit`` the fairness-penalized score used during mining.
    """

    grouping: Pattern
    intervention: Pattern
    utility: float
    utility_p: float
    utility_np: float
    p_value: float
    coverage: CoverageSet
    benefit: float

    @property
    def text(self) -> str:
        return f"{self.grouping} => {self.intervention}"

    def sort_key(self) -> tuple:
        return (self.grouping.sort_key(), self.intervention.sort_key())


def _utility_or_zero(dataset, rows, intervention, dag, min_group_size) -> tuple[float, float]:
    """(point, p_value); empty or positivity-violating subsets count as zero."""
    if rows.size == 0:
        return 0.0, 1.0
    try:
        est = cate_on_rows(
            dataset, rows, intervention, dag, min_group_size=min_group_size
        )
    except PositivityViolation:
        return 0.0, 1.0
    return est.point, est.p_value


def rule_utilities(
    dataset: Dataset,
    dag: CausalDag,
    grouping: Pattern,
    intervention: Pattern,
    *,
    min_group_size: int = 10,
) -> tuple[float, float, float, float]:
    """Overall / protected / non-protected utilities plus the overall p-value.

    A subgroup whose coverage is empty or fails positivity contributes zero
    utility. SingularDesign propagates to the caller.
    """
    rows = coverage(grouping, dataset).row_ids
    if rows.size == 0:
        return 0.0, 0.0, 0.0, 1.0
    prot = dataset.protected_mask[rows]
    utility, p_value = _utility_or_zero(dataset, rows, intervention, dag, min_group_size)
    utility_p, _ = _utility_or_zero(dataset, rows[prot], intervention, dag, min_group_size)
    utility_np, _ = _utility_or_zero(dataset, rows[~prot], intervention, dag, min_group_size)
    return utility, utility_p, utility_np, p_value


def benefit_sp(rule: PrescriptionRule) -> float:
    """Utility penalized by the protected/non-protected utility gap."""
    return sp_benefit_value(rule.utility, rule.utility_p, rule.utility_np)


def sp_benefit_value(utility: float, utility_p: float, utility_np: float) -> float:
    if utility_np >= utility_p:
        return utility / (1.0 + utility_np - utility_p)
    return utility


def benefit_bgl(rule: PrescriptionRule, tau: float) -> float:
    """Utility penalized by the shortfall against the protected floor tau."""
    return bgl_benefit_value(rule.utility, rule.utility_p, tau)


def bgl_benefit_value(utility: float, utility_p: float, tau: float) -> float:
    if tau >= utility_p:
        return utility / (1.0 + tau - utility_p)
    return utility


def rule_benefit(rule: PrescriptionRule, mode: FairnessMode) -> float:
    if mode.variant in (FairnessVariant.SP_GROUP, FairnessVariant.SP_INDIVIDUAL):
        return benefit_sp(rule)
    if mode.variant in (FairnessVariant.BGL_GROUP, FairnessVariant.BGL_INDIVIDUAL):
        return benefit_bgl(rule, mode.tau)
    return rule.utility


def passes_individual_constraint(rule: PrescriptionRule, mode: FairnessMode) -> bool:
    if mode.variant is FairnessVariant.SP_INDIVIDUAL:
        return abs(rule.utility_p - rule.utility_np) <= mode.epsilon
    if mode.variant is FairnessVariant.BGL_INDIVIDUAL:
        return rule.utility_p >= mode.tau
    return True


def _evaluate(
    dataset: Dataset,
    dag: CausalDag,
    grouping: Pattern,
    group_cov: CoverageSet,
    assignments: tuple[Assignment, ...],
    cfg: MiningConfig,
    cache: dict | None,
) -> PrescriptionRule | None:
    """Build a rule for one intervention; None when estimation degenerates."""
    key = None
    if cache is not None:
        key = (grouping.sort_key(), assignments)
        hit = cache.get(key)
        if hit is not None:
            return hit if hit is not False else None
    intervention = Pattern(Predicate(a, "=", v) for a, v in assignments)
    try:
        u, u_p, u_np, p = rule_utilities(
            dataset, dag, grouping, intervention, min_group_size=cfg.min_group_size
        )
    except SingularDesign:
        # Degenerate design for this candidate only; treat as non-survivor.
        if cache is not None:
            cache[key] = False
        return None
    rule = PrescriptionRule(
        grouping=grouping,
        intervention=intervention,
        utility=u,
        utility_p=u_p,
        utility_np=u_np,
        p_value=p,
        coverage=group_cov,
        benefit=u,
    )
    if cache is not None:
        cache[key] = rule
    return rule


def _survives(rule: PrescriptionRule, cfg: MiningConfig) -> bool:
    return rule.utility > 0.0 and rule.p_value <= cfg.alpha


def mine_intervention(
    dataset: Dataset,
    dag: CausalDag,
    grouping: Pattern,
    mode: FairnessMode,
    cfg: MiningConfig,
    cache: dict | None = None,
) -> PrescriptionRule | None:
    """Best-scoring intervention for one grouping pattern, or None.

    Scoring: utility without fairness, SP benefit under SP modes, BGL benefit
    under BGL modes. Individual-fairness modes additionally require the
    per-rule constraint to hold before a candidate can be returned.
    """
    group_cov = coverage(grouping, dataset)
    relevant = causally_relevant_attributes(dag, dataset.outcome_name)
    attrs = sorted(
        set(dataset.attributes_with_role(Role.MUTABLE))
        & relevant - grouping.attributes()
    )

    def all_assignments(attr: str) -> list[Assignment]:
        spec = dataset.attribute(attr)
        if not spec.is_categorical:
            return []
        return [(attr, v) for v in spec.domain.values]

    survivors: dict[tuple[Assignment, ...], PrescriptionRule] = {}
    if cfg.exhaustive_interventions:
        max_len = min(cfg.max_intervention_len, len(attrs))
        for k in range(1, max_len + 1):
            for attr_combo in combinations(attrs, k):
                value_lists = [all_assignments(a) for a in attr_combo]
                if any(not vl for vl in value_lists):
                    continue
                for combo in product(*value_lists):
                    rule = _evaluate(
                        dataset, dag, grouping, group_cov, tuple(combo), cfg, cache
                    )
                    if rule is not None and _survives(rule, cfg):
                        survivors[tuple(combo)] = rule
    else:
        level: dict[tuple[Assignment, ...], PrescriptionRule] = {}
        for attr in attrs:
            for assignment in all_assignments(attr):
                rule = _evaluate(
                    dataset, dag, grouping, group_cov, (assignment,), cfg, cache
                )
                if rule is not None and _survives(rule, cfg):
                    level[(assignment,)] = rule
        survivors.update(level)
        length = 1
        while level and length < cfg.max_intervention_len:
            keys = sorted(level.keys())
            nxt: dict[tuple[Assignment, ...], PrescriptionRule] = {}
            for a, b in combinations(keys, 2):
                if a[:-1] != b[:-1] or a[-1][0] == b[-1][0]:
                    continue
                cand = a + (b[-1],)
                if any(
                    cand[:i] + cand[i + 1 :] not in level for i in range(len(cand))
                ):
                    continue
                rule = _evaluate(dataset, dag, grouping, group_cov, cand, cfg, cache)
                if rule is not None and _survives(rule, cfg):
                    nxt[cand] = rule
            survivors.update(nxt)
            level = nxt
            length += 1

    best: PrescriptionRule | None = None
    best_key: tuple | None = None
    for assignments in sorted(survivors.keys()):
        rule = survivors[assignments]
        if not passes_individual_constraint(rule, mode):
            continue
        scored = replace(rule, benefit=rule_benefit(rule, mode))
        key = (
            -scored.benefit,
            -scored.utility,
            len(scored.intervention),
            scored.intervention.sort_key(),
        )
        if best_key is None or key < best_key:
            best, best_key = scored, key
    if best is None:
        log.debug("no surviving intervention for grouping %s", grouping)
    return best
