"""Synthetic tabular worlds with planted intervention effects.

Immutable attributes are sampled i.i.d. categorical; the first one drives the
protected flag. Mutable attributes are sampled with propensities that depend
on the first immutable attribute, so treatment assignment is confounded
(disable via ``confounding_strength=0``). The outcome adds the planted effect
of each active (attribute, value) assignment -- protected- or
non-protected-specific -- to a linear term in the immutable codes plus
Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dag import CausalDag, DagKind, generate_simplified_dag
from .data import AttributeSpec, Categorical, Dataset, Numeric, Pattern, Predicate, Role

EffectMap = dict[tuple[str, str], tuple[float, float]]  # (attr, value) -> (protected, nonprotected)


@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int
    n_immutable: int
    n_mutable: int
    categorical_cardinality: int = 3
    effect_map: EffectMap = field(default_factory=dict)
    noise_sd: float = 0.1
    protected_fraction: float = 0.2
    seed: int = 0
    confounding_strength: float = 1.0
    immutable_outcome_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (0.0 < self.protected_fraction < 1.0):
            raise ValueError("protected_fraction must lie in (0, 1)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.n_immutable < 1 or self.n_mutable < 1:
            raise ValueError("need at least one immutable and one mutable attribute")
        if self.categorical_cardinality < 2:
            raise ValueError("categorical_cardinality must be >= 2")


def immutable_names(spec: SyntheticSpec) -> list[str]:
    return [f"I{i}" for i in range(spec.n_immutable)]


def mutable_names(spec: SyntheticSpec) -> list[str]:
    return [f"M{j}" for j in range(spec.n_mutable)]


def value_labels(spec: SyntheticSpec) -> list[str]:
    return [f"v{k}" for k in range(spec.categorical_cardinality)]


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, CausalDag, dict]:
    """Sample one world; returns (dataset, true DAG, ground-truth record)."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_rows
    card = spec.categorical_cardinality
    labels = value_labels(spec)
    imm = immutable_names(spec)
    mut = mutable_names(spec)

    # I0 value v0 marks the protected group; the rest of its mass is uniform.
    p0 = np.full(card, (1.0 - spec.protected_fraction) / (card - 1))
    p0[0] = spec.protected_fraction
    codes: dict[str, np.ndarray] = {}
    codes[imm[0]] = rng.choice(card, size=n, p=p0).astype(np.int32)
    for name in imm[1:]:
        codes[name] = rng.integers(0, card, size=n, dtype=np.int32)

    protected = codes[imm[0]] == 0
    z = codes[imm[0]] / (card - 1)  # confounder signal in [0, 1]

    # P(M_j = v1) rises with z; the remaining mass is uniform over the rest.
    for j, name in enumerate(mut):
        base = 0.35 + 0.05 * (j % 3)
        p_treat = base + 0.5 * spec.confounding_strength * (z - 0.5)
        p_treat = np.clip(p_treat, 0.1, 0.9)
        u = rng.random(n)
        treated = u < p_treat
        others = [k for k in range(card) if k != 1]
        col = np.where(
            treated, 1, rng.choice(others, size=n).astype(np.int64)
        ).astype(np.int32)
        codes[name] = col

    if spec.immutable_outcome_weights is not None:
        weights = np.asarray(spec.immutable_outcome_weights, dtype=np.float64)
        if weights.size != spec.n_immutable:
            raise ValueError("immutable_outcome_weights length must match n_immutable")
    else:
        weights = np.asarray([1.0 / (i + 1) for i in range(spec.n_immutable)])

    outcome = np.zeros(n)
    for i, name in enumerate(imm):
        outcome += weights[i] * codes[name].astype(np.float64)
    for (attr, value), (eff_p, eff_np) in spec.effect_map.items():
        if attr not in codes:
            raise ValueError(f"effect_map references unknown attribute {attr!r}")
        code = labels.index(value)
        active = codes[attr] == code
        outcome += np.where(protected, eff_p, eff_np) * active
    if spec.noise_sd > 0:
        outcome += rng.normal(0.0, spec.noise_sd, size=n)

    schema = (
        [AttributeSpec(a, Role.IMMUTABLE, Categorical(tuple(labels))) for a in imm]
        + [AttributeSpec(a, Role.MUTABLE, Categorical(tuple(labels))) for a in mut]
        + [AttributeSpec("O", Role.OUTCOME, Numeric(float(outcome.min()), float(outcome.max())))]
    )
    columns = dict(codes)
    columns["O"] = outcome
    protected_pattern = Pattern([Predicate(imm[0], "=", labels[0])])
    dataset = Dataset(schema, columns, protected_pattern)
    dag = generate_simplified_dag(DagKind.TWO_LAYER, schema)
    truth = {
        "effects": {f"{a}={v}": [e_p, e_np] for (a, v), (e_p, e_np) in spec.effect_map.items()},
        "immutable_outcome_weights": weights.tolist(),
        "protected_pattern": str(protected_pattern),
        "protected_fraction_realized": float(protected.mean()),
        "noise_sd": spec.noise_sd,
        "seed": spec.seed,
    }
    return dataset, dag, truth
