"""Run-mode dataclasses shared by the miners and the selector."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .cate import DEFAULT_MIN_GROUP_SIZE


class FairnessVariant(str, Enum):
    NONE = "none"
    SP_GROUP = "sp_group"
    SP_INDIVIDUAL = "sp_individual"
    BGL_GROUP = "bgl_group"
    BGL_INDIVIDUAL = "bgl_individual"


class CoverageVariant(str, Enum):
    NONE = "none"
    GROUP = "group"
    RULE = "rule"


@dataclass(frozen=True)
class FairnessMode:
    variant: FairnessVariant = FairnessVariant.NONE
    epsilon: float | None = None  # SP modes
    tau: float | None = None  # BGL modes

    def __post_init__(self):
        sp = self.variant in (FairnessVariant.SP_GROUP, FairnessVariant.SP_INDIVIDUAL)
        bgl = self.variant in (FairnessVariant.BGL_GROUP, FairnessVariant.BGL_INDIVIDUAL)
        if sp:
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError("SP fairness needs epsilon > 0")
            if self.tau is not None:
                raise ValueError("tau is only meaningful for BGL fairness")
        elif bgl:
            if self.tau is None or self.tau < 0:
                raise ValueError("BGL fairness needs tau >= 0")
            if self.epsilon is not None:
                raise ValueError("epsilon is only meaningful for SP fairness")
        elif self.epsilon is not None or self.tau is not None:
            raise ValueError("thresholds given without a fairness variant")

    @property
    def is_group(self) -> bool:
        return self.variant in (FairnessVariant.SP_GROUP, FairnessVariant.BGL_GROUP)

    @property
    def is_individual(self) -> bool:
        return self.variant in (
            FairnessVariant.SP_INDIVIDUAL,
            FairnessVariant.BGL_INDIVIDUAL,
        )

    @classmethod
    def none(cls) -> "FairnessMode":
        return cls(FairnessVariant.NONE)

    @classmethod
    def sp_group(cls, epsilon: float) -> "FairnessMode":
        return cls(FairnessVariant.SP_GROUP, epsilon=epsilon)

    @classmethod
    def sp_individual(cls, epsilon: float) -> "FairnessMode":
        return cls(FairnessVariant.SP_INDIVIDUAL, epsilon=epsilon)

    @classmethod
    def bgl_group(cls, tau: float) -> "FairnessMode":
        return cls(FairnessVariant.BGL_GROUP, tau=tau)

    @classmethod
    def bgl_individual(cls, tau: float) -> "FairnessMode":
        return cls(FairnessVariant.BGL_INDIVIDUAL, tau=tau)


@dataclass(frozen=True)
class CoverageMode:
    variant: CoverageVariant = CoverageVariant.NONE
    theta: float = 0.0
    theta_p: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= 1.0 and 0.0 <= self.theta_p <= 1.0):
            raise ValueError("coverage thresholds must lie in [0, 1]")

    @classmethod
    def none(cls) -> "CoverageMode":
        return cls(CoverageVariant.NONE)

    @classmethod
    def group(cls, theta: float, theta_p: float) -> "CoverageMode":
        return cls(CoverageVariant.GROUP, theta=theta, theta_p=theta_p)

    @classmethod
    def rule(cls, theta: float, theta_p: float) -> "CoverageMode":
        return cls(CoverageVariant.RULE, theta=theta, theta_p=theta_p)


@dataclass(frozen=True)
class SelectionConfig:
    fairness: FairnessMode = field(default_factory=FairnessMode.none)
    coverage: CoverageMode = field(default_factory=CoverageMode.none)
    lambda1: float = 0.0
    lambda2: float = 1.0
    stop_threshold: float = 0.01
    max_rules: int = 20
    w_coverage: float = 1.0
    w_benefit: float = 1.0
    w_utility: float = 1.0
    expu_denominator: str = "covered"  # or "total"

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0 or self.lambda1 + self.lambda2 <= 0:
            raise ValueError("need lambda1, lambda2 >= 0 with lambda1 + lambda2 > 0")
        if self.expu_denominator not in ("covered", "total"):
            raise ValueError("expu_denominator must be 'covered' or 'total'")
        if self.max_rules < 1:
            raise ValueError("max_rules must be positive")


@dataclass(frozen=True)
class MiningConfig:
    apriori_support: float = 0.1
    max_grouping_len: int = 3
    max_intervention_len: int = 3
    alpha: float = 0.05
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE
    exhaustive_interventions: bool = False

    def __post_init__(self):
        if not (0.0 < self.apriori_support <= 1.0):
            raise ValueError("apriori_support must lie in (0, 1]")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
