"""Conditional average treatment effect estimation.

The estimator is ordinary least squares of the outcome on [intercept,
treatment indicator, confounder encoding], where the confounders are the
DAG-derived adjustment set for the intervention's attributes. Categorical
confounders are one-hot encoded over their full domains; collinear columns
are dropped deterministically (left-to-right keep order, so later domain
values fall out first). Numeric confounders enter as single linear columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dag import CausalDag, adjustment_set
from .data import COMPARISON_OPS, Dataset, Pattern, Role, coverage
from .errors import PatternError, PositivityViolation, SingularDesign

DEFAULT_MIN_GROUP_SIZE = 10
_RANK_TOL = 1e-8


@dataclass(frozen=True)
class CateEstimate:
    point: float
    std_err: float
    p_value: float
    n_treated: int
    n_control: int
    adjustment_set: frozenset[str]


def validate_intervention(pattern: Pattern, dataset: Dataset) -> None:
    """Interventions assign values: mutable attributes, equality only."""
    for pred in pattern.predicates:
        spec = dataset.attribute(pred.attribute)
        if spec.role is not Role.MUTABLE:
            raise PatternError(
                f"intervention predicate on non-mutable attribute {pred.attribute!r}"
            )
        if pred.op != "=":
            raise PatternError(
                f"intervention predicate must use '=', got {pred.op!r}"
            )


def treatment_mask(dataset: Dataset, rows: np.ndarray, intervention: Pattern) -> np.ndarray:
    """T=1 where the row satisfies every intervention predicate, else 0.

    Rows matching only part of a multi-attribute intervention count as control.
    """
    mask = np.ones(rows.size, dtype=bool)
    for pred in intervention.predicates:
        col = dataset.columns[pred.attribute][rows]
        spec = dataset.attribute(pred.attribute)
        if spec.is_categorical:
            code = dataset.code_of(pred.attribute, pred.value)
            mask &= col == code if code >= 0 else np.zeros(rows.size, dtype=bool)
        else:
            mask &= col == float(pred.value)
    return mask


def _independent_columns(X: np.ndarray) -> list[int]:
    """Greedy left-to-right rank filter via repeated orthogonalization."""
    n = X.shape[0]
    kept: list[int] = []
    basis = np.empty((n, 0))
    for j in range(X.shape[1]):
        v = X[:, j].astype(np.float64, copy=True)
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            continue
        for _ in range(2):  # re-orthogonalize once for stability
            if basis.shape[1]:
                v -= basis @ (basis.T @ v)
        if np.linalg.norm(v) > _RANK_TOL * norm0:
            kept.append(j)
            basis = np.hstack([basis, (v / np.linalg.norm(v))[:, None]])
    return kept


def cate_on_rows(
    dataset: Dataset,
    rows: np.ndarray,
    intervention: Pattern,
    dag: CausalDag,
    *,
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
) -> CateEstimate:
    """Estimate the intervention's effect within an explicit row subset."""
    validate_intervention(intervention, dataset)
    rows = np.asarray(rows, dtype=np.int64)
    t_mask = treatment_mask(dataset, rows, intervention)
    n_treated = int(t_mask.sum())
    n_control = int(rows.size - n_treated)
    if n_treated < min_group_size or n_control < min_group_size:
        raise PositivityViolation(n_treated, n_control, min_group_size)

    treatments = intervention.attributes()
    adj = adjustment_set(dag, treatments, dataset.outcome_name)

    cols = [np.ones(rows.size), t_mask.astype(np.float64)]
    for name in sorted(adj):
        spec = dataset.attribute(name)
        values = dataset.columns[name][rows]
        if spec.is_categorical:
            for code in range(len(spec.domain.values)):
                cols.append((values == code).astype(np.float64))
        else:
            cols.append(values.astype(np.float64))
    X = np.column_stack(cols)

    kept = _independent_columns(X)
    if 1 not in kept:
        raise SingularDesign("treatment column is collinear with the intercept")
    Xk = X[:, kept]
    t_idx = kept.index(1)
    df = rows.size - len(kept)
    if df <= 0:
        raise SingularDesign(f"no residual degrees of freedom (n={rows.size}, k={len(kept)})")

    y = dataset.outcome()[rows]
    beta, _, _, _ = np.linalg.lstsq(Xk, y, rcond=None)
    resid = y - Xk @ beta
    rss = float(resid @ resid)
    sigma2 = rss / df
    xtx_inv = np.linalg.pinv(Xk.T @ Xk)
    var_t = sigma2 * xtx_inv[t_idx, t_idx]
    std_err = float(np.sqrt(var_t)) if var_t > 0 else 0.0
    point = float(beta[t_idx])
    if std_err > 0:
        t_stat = point / std_err
        p_value = float(2.0 * stats.t.sf(abs(t_stat), df))
    else:
        # Zero residual variance: the effect is exact, not a statistic.
        p_value = 1.0 if abs(point) <= 1e-9 else 0.0
    return CateEstimate(
        point=point,
        std_err=std_err,
        p_value=p_value,
        n_treated=n_treated,
        n_control=n_control,
        adjustment_set=adj,
    )


def estimate_cate(
    dataset: Dataset,
    group: Pattern,
    intervention: Pattern,
    dag: CausalDag,
    *,
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
) -> CateEstimate:
    """Effect of the intervention within the subpopulation a pattern selects."""
    for pred in group.predicates:
        if pred.attribute == dataset.outcome_name:
            raise PatternError("conditioning pattern cannot use the outcome attribute")
        if pred.op in COMPARISON_OPS and dataset.attribute(pred.attribute).is_categorical:
            raise PatternError(
                f"comparison op {pred.op!r} on categorical attribute {pred.attribute!r}"
            )
    rows = coverage(group, dataset).row_ids
    return cate_on_rows(
        dataset, rows, intervention, dag, min_group_size=min_group_size
    )
