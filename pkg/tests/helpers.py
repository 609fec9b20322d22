"""Shared fixtures-in-code: sample tables, planted SCM worlds, test oracles."""

from __future__ import annotations

import numpy as np

from faircap.dag import CausalDag
from faircap.data import (
    AttributeSpec,
    Categorical,
    CoverageSet,
    Dataset,
    Numeric,
    Pattern,
    Predicate,
    Role,
)
from faircap.interventions import PrescriptionRule


def survey_dataset() -> Dataset:
    """Four-row developer-survey sample with the usual demographic columns."""
    schema = [
        AttributeSpec("Gender", Role.IMMUTABLE, Categorical(("Male", "Non-binary", "Female"))),
        AttributeSpec(
            "Ethnicity",
            Role.IMMUTABLE,
            Categorical(("White", "South Asian", "East Asian")),
        ),
        AttributeSpec("Age", Role.IMMUTABLE, Numeric(18, 70)),
        AttributeSpec(
            "Role",
            Role.MUTABLE,
            Categorical(
                (
                    "Data Scientist",
                    "QA developer",
                    "C-suite executive",
                    "Back-end developer",
                )
            ),
        ),
        AttributeSpec(
            "Education", Role.MUTABLE, Categorical(("PhD", "Bachelor's degree"))
        ),
        AttributeSpec("Country", Role.IMMUTABLE, Categorical(("US", "India", "China"))),
        AttributeSpec("Salary", Role.OUTCOME, Numeric(0, 1e6)),
    ]
    rows = [
        ("Male", "White", 26, "Data Scientist", "PhD", "US", 180_000),
        ("Non-binary", "White", 32, "QA developer", "Bachelor's degree", "US", 83_000),
        ("Male", "South Asian", 29, "C-suite executive", "Bachelor's degree", "India", 24_000),
        ("Female", "East Asian", 21, "Back-end developer", "Bachelor's degree", "China", 19_000),
    ]
    protected = Pattern([Predicate("Ethnicity", "!=", "White")])
    return Dataset.from_rows(schema, rows, protected)


def survey_dag() -> CausalDag:
    """Demographics -> education/role -> salary graph over the survey schema."""
    return CausalDag.from_edges(
        [
            ("Ethnicity", "Salary"),
            ("Gender", "Role"),
            ("Age", "Role"),
            ("Education", "Role"),
            ("Education", "Salary"),
            ("Ethnicity", "Education"),
            ("Ethnicity", "Role"),
            ("Gender", "Education"),
            ("Age", "Education"),
            ("Role", "Salary"),
            ("Gender", "Salary"),
            ("Age", "Salary"),
        ]
    )


def bernoulli_scm(
    n: int,
    seed: int,
    effect: float = 2.0,
    noise_sd: float = 0.1,
    z_coef: float = 1.0,
) -> tuple[Dataset, CausalDag]:
    """Z ~ Bern(0.5); T ~ Bern(0.3 + 0.4 Z); O = effect*T + z_coef*Z + noise."""
    rng = np.random.default_rng(seed)
    z = rng.random(n) < 0.5
    t = rng.random(n) < (0.3 + 0.4 * z)
    o = effect * t + z_coef * z + rng.normal(0.0, noise_sd, size=n)
    schema = [
        AttributeSpec("Z", Role.IMMUTABLE, Categorical(("0", "1"))),
        AttributeSpec("T", Role.MUTABLE, Categorical(("0", "1"))),
        AttributeSpec("O", Role.OUTCOME, Numeric(float(o.min()), float(o.max()))),
    ]
    columns = {
        "Z": z.astype(np.int32),
        "T": t.astype(np.int32),
        "O": o,
    }
    dag = CausalDag.from_edges([("Z", "T"), ("Z", "O"), ("T", "O")])
    return Dataset(schema, columns, Pattern()), dag


def stratified_diff_means(
    z: np.ndarray, t: np.ndarray, o: np.ndarray
) -> float:
    """Confounder-adjusted oracle: stratum-weighted difference of means."""
    total = 0.0
    n = z.size
    for value in np.unique(z):
        sel = z == value
        treated = sel & t
        control = sel & ~t
        if not treated.any() or not control.any():
            continue
        total += (sel.sum() / n) * (o[treated].mean() - o[control].mean())
    return total


def make_rule(
    dataset: Dataset,
    row_ids,
    utility: float,
    *,
    utility_p: float | None = None,
    utility_np: float | None = None,
    p_value: float = 0.001,
    benefit: float | None = None,
    tag: str = "r",
) -> PrescriptionRule:
    """Hand-built rule for selector tests; patterns are synthetic labels."""
    row_ids = np.asarray(sorted(row_ids), dtype=np.int64)
    protected_count = int(dataset.protected_mask[row_ids].sum())
    cov = CoverageSet(
        row_ids=row_ids, count=int(row_ids.size), protected_count=protected_count
    )
    return PrescriptionRule(
        grouping=Pattern([Predicate("G", "=", tag)]),
        intervention=Pattern([Predicate("M", "=", tag)]),
        utility=float(utility),
        utility_p=float(utility if utility_p is None else utility_p),
        utility_np=float(utility if utility_np is None else utility_np),
        p_value=p_value,
        coverage=cov,
        benefit=float(utility if benefit is None else benefit),
    )


def plain_dataset(n: int, protected_rows=()) -> Dataset:
    """Minimal dataset whose only content is a protected-row mask."""
    flag = np.zeros(n, dtype=np.int32)
    flag[list(protected_rows)] = 1
    schema = [
        AttributeSpec("P", Role.IMMUTABLE, Categorical(("no", "yes"))),
        AttributeSpec("M", Role.MUTABLE, Categorical(("a", "b"))),
        AttributeSpec("O", Role.OUTCOME, Numeric(0.0, 1.0)),
    ]
    columns = {
        "P": flag,
        "M": np.zeros(n, dtype=np.int32),
        "O": np.zeros(n),
    }
    return Dataset(schema, columns, Pattern([Predicate("P", "=", "yes")]))


def exp_utility_oracle(rules, dataset) -> tuple[float, float, float]:
    """Definitional per-row oracle for the three ruleset aggregates."""
    n = dataset.n
    per_row: list[list[float]] = [[] for _ in range(n)]
    for r in rules:
        for i in r.coverage.row_ids:
            per_row[int(i)].append(r.utility)
    total = 0.0
    p_sum, p_cnt = 0.0, 0
    np_sum, np_cnt = 0.0, 0
    for i in range(n):
        if not per_row[i]:
            continue
        total += max(per_row[i])
        if dataset.protected_mask[i]:
            p_sum += min(per_row[i])
            p_cnt += 1
        else:
            np_sum += max(per_row[i])
            np_cnt += 1
    return (
        total / n,
        (p_sum / p_cnt) if p_cnt else 0.0,
        (np_sum / np_cnt) if np_cnt else 0.0,
    )


def random_categorical_dataset(
    rng: np.random.Generator,
    n_rows: int,
    n_attrs: int,
    card: int,
    protected_frac: float = 0.25,
) -> Dataset:
    """Uniform random categorical table, first attribute drives protection."""
    labels = tuple(f"v{k}" for k in range(card))
    schema = [
        AttributeSpec(f"A{i}", Role.IMMUTABLE, Categorical(labels))
        for i in range(n_attrs)
    ]
    schema.append(AttributeSpec("M", Role.MUTABLE, Categorical(("x", "y"))))
    schema.append(AttributeSpec("O", Role.OUTCOME, Numeric(0, 1)))
    columns = {
        f"A{i}": rng.integers(0, card, size=n_rows, dtype=np.int32)
        for i in range(n_attrs)
    }
    columns["M"] = rng.integers(0, 2, size=n_rows, dtype=np.int32)
    columns["O"] = rng.random(n_rows)
    protected = Pattern([Predicate("A0", "=", "v0")])
    return Dataset(schema, columns, protected)
