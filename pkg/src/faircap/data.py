"""Dataset model: attribute schema, patterns, predicate evaluation, coverage.

Rows are stored column-wise as numpy arrays. Categorical columns hold int32
codes indexing the attribute's domain tuple; numeric columns hold float64.
A dataset is immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import PatternError, UnknownAttribute


class Role(str, Enum):
    IMMUTABLE = "immutable"
    MUTABLE = "mutable"
    OUTCOME = "outcome"


@dataclass(frozen=True)
class Categorical:
    values: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.values)) != len(self.values):
            raise ValueError("categorical domain has duplicate values")


@dataclass(frozen=True)
class Numeric:
    lo: float
    hi: float


Domain = Union[Categorical, Numeric]


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    role: Role
    domain: Domain

    @property
    def is_categorical(self) -> bool:
        return isinstance(self.domain, Categorical)


OPS = ("=", "!=", "<", ">", "<=", ">=")
COMPARISON_OPS = frozenset({"<", ">", "<=", ">="})


@dataclass(frozen=True)
class Predicate:
    """Single comparison `attribute op value`.

    Comparison ops (<, >, <=, >=) are only legal on numeric attributes; that is
    checked wherever a schema is in hand (pattern evaluation, CLI parsing).
    """

    attribute: str
    op: str
    value: object

    def __post_init__(self):
        if self.op not in OPS:
            raise PatternError(f"unknown operator {self.op!r}")

    def sort_key(self) -> tuple[str, str, str]:
        return (self.attribute, self.op, str(self.value))

    def __str__(self) -> str:
        return f"{self.attribute}{self.op}{self.value}"


class Pattern:
    """Conjunction of predicates. Empty conjunction covers every tuple."""

    __slots__ = ("predicates",)

    def __init__(self, predicates: Iterable[Predicate] = ()):
        preds = tuple(sorted(predicates, key=Predicate.sort_key))
        seen = set()
        for p in preds:
            key = (p.attribute, p.op)
            if key in seen:
                raise PatternError(
                    f"duplicate predicate on ({p.attribute!r}, {p.op!r})"
                )
            seen.add(key)
        object.__setattr__(self, "predicates", preds)

    def __setattr__(self, name, value):
        raise AttributeError("Pattern is immutable")

    def __reduce__(self):
        return (Pattern, (self.predicates,))

    def __len__(self) -> int:
        return len(self.predicates)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.predicates == other.predicates

    def __hash__(self) -> int:
        return hash(self.predicates)

    def attributes(self) -> frozenset[str]:
        return frozenset(p.attribute for p in self.predicates)

    def sort_key(self) -> tuple:
        return tuple(p.sort_key() for p in self.predicates)

    def conjoin(self, other: "Pattern") -> "Pattern":
        return Pattern(self.predicates + other.predicates)

    def __str__(self) -> str:
        if not self.predicates:
            return "*"
        return " & ".join(str(p) for p in self.predicates)

    def __repr__(self) -> str:
        return f"Pattern({self})"


EMPTY_PATTERN = Pattern()


def pattern_refines(child: Pattern, parent: Pattern) -> bool:
    """True iff parent's predicates are a subset of child's."""
    return set(parent.predicates) <= set(child.predicates)


@dataclass(frozen=True, eq=False)
class CoverageSet:
    """Rows matched by a pattern, with the protected-subset count."""

    row_ids: np.ndarray  # sorted int64
    count: int
    protected_count: int


class Dataset:
    """Column-typed tuple table with attribute roles and a protected pattern."""

    def __init__(
        self,
        schema: Sequence[AttributeSpec],
        columns: Mapping[str, np.ndarray],
        protected_pattern: Pattern = EMPTY_PATTERN,
    ):
        schema = tuple(schema)
        outcomes = [a for a in schema if a.role is Role.OUTCOME]
        if len(outcomes) != 1:
            raise ValueError(f"schema needs exactly one outcome, found {len(outcomes)}")
        if not isinstance(outcomes[0].domain, Numeric):
            raise ValueError("outcome attribute must be numeric")
        self.schema = schema
        self._by_name = {a.name: a for a in schema}
        if len(self._by_name) != len(schema):
            raise ValueError("duplicate attribute names in schema")

        cols = {}
        n = None
        for a in schema:
            if a.name not in columns:
                raise UnknownAttribute(f"missing column {a.name!r}")
            arr = np.asarray(columns[a.name])
            if a.is_categorical:
                arr = arr.astype(np.int32, copy=False)
                if arr.size and (arr.min() < 0 or arr.max() >= len(a.domain.values)):
                    raise ValueError(f"column {a.name!r} has codes outside its domain")
            else:
                arr = arr.astype(np.float64, copy=False)
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise ValueError("column lengths differ")
            cols[a.name] = arr
        if not n:
            raise ValueError("dataset needs at least one row")
        self.columns = cols
        self.n = int(n)
        self.outcome_name = outcomes[0].name
        self.protected_pattern = protected_pattern
        self.protected_mask = pattern_mask(protected_pattern, self)
        self.protected_mask.setflags(write=False)
        self.n_protected = int(self.protected_mask.sum())
        self._fingerprint = None

    def attribute(self, name: str) -> AttributeSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownAttribute(f"no attribute named {name!r}") from None

    def attributes_with_role(self, role: Role) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema if a.role is role)

    def code_of(self, attr: str, value: object) -> int:
        """Domain index of a categorical value, or -1 if absent."""
        spec = self.attribute(attr)
        try:
            return spec.domain.values.index(str(value))
        except ValueError:
            return -1

    def outcome(self) -> np.ndarray:
        return self.columns[self.outcome_name]

    def fingerprint(self) -> str:
        """Content hash; used to key cross-process estimate caches."""
        if self._fingerprint is None:
            h = hashlib.sha1()
            h.update(repr([(a.name, a.role.value, a.domain) for a in self.schema]).encode())
            for a in self.schema:
                h.update(self.columns[a.name].tobytes())
            h.update(str(self.protected_pattern).encode())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    @classmethod
    def from_rows(
        cls,
        schema: Sequence[AttributeSpec],
        rows: Iterable[Sequence[object]],
        protected_pattern: Pattern = EMPTY_PATTERN,
    ) -> "Dataset":
        """Build from row tuples aligned with the schema order (test helper)."""
        schema = tuple(schema)
        raw = list(rows)
        columns = {}
        for j, a in enumerate(schema):
            cells = [r[j] for r in raw]
            if a.is_categorical:
                index = {v: i for i, v in enumerate(a.domain.values)}
                try:
                    codes = [index[str(c)] for c in cells]
                except KeyError as exc:
                    raise ValueError(
                        f"value {exc.args[0]!r} not in domain of {a.name!r}"
                    ) from None
                columns[a.name] = np.asarray(codes, dtype=np.int32)
            else:
                columns[a.name] = np.asarray([float(c) for c in cells], dtype=np.float64)
        return cls(schema, columns, protected_pattern)


def evaluate_predicate(pred: Predicate, row: Sequence[object], dataset: Dataset) -> bool:
    """Evaluate one predicate against a raw row tuple aligned with the schema."""
    spec = dataset.attribute(pred.attribute)
    idx = dataset.schema.index(spec)
    cell = row[idx]
    return _compare_scalar(spec, pred, cell)


def _compare_scalar(spec: AttributeSpec, pred: Predicate, cell: object) -> bool:
    if spec.is_categorical:
        if pred.op in COMPARISON_OPS:
            raise PatternError(
                f"comparison op {pred.op!r} on categorical attribute {spec.name!r}"
            )
        same = str(cell) == str(pred.value)
        return same if pred.op == "=" else not same
    x = float(cell)  # numeric domain
    v = float(pred.value)
    if pred.op == "=":
        return x == v
    if pred.op == "!=":
        return x != v
    if pred.op == "<":
        return x < v
    if pred.op == ">":
        return x > v
    if pred.op == "<=":
        return x <= v
    return x >= v


def predicate_mask(pred: Predicate, dataset: Dataset) -> np.ndarray:
    """Boolean match vector for one predicate over all rows."""
    spec = dataset.attribute(pred.attribute)
    col = dataset.columns[spec.name]
    if spec.is_categorical:
        if pred.op in COMPARISON_OPS:
            raise PatternError(
                f"comparison op {pred.op!r} on categorical attribute {spec.name!r}"
            )
        code = dataset.code_of(spec.name, pred.value)
        # A value outside the domain matches nothing (everything for !=).
        eq = col == code if code >= 0 else np.zeros(dataset.n, dtype=bool)
        return eq if pred.op == "=" else ~eq
    v = float(pred.value)
    if pred.op == "=":
        return col == v
    if pred.op == "!=":
        return col != v
    if pred.op == "<":
        return col < v
    if pred.op == ">":
        return col > v
    if pred.op == "<=":
        return col <= v
    return col >= v


def pattern_mask(pattern: Pattern, dataset: Dataset) -> np.ndarray:
    """Boolean vector of rows satisfying the whole conjunction."""
    mask = np.ones(dataset.n, dtype=bool)
    for pred in pattern.predicates:
        mask &= predicate_mask(pred, dataset)
    return mask


def coverage(pattern: Pattern, dataset: Dataset) -> CoverageSet:
    """Rows covered by the pattern plus how many of them are protected."""
    mask = pattern_mask(pattern, dataset)
    row_ids = np.flatnonzero(mask).astype(np.int64)
    protected = int(dataset.protected_mask[row_ids].sum())
    return CoverageSet(row_ids=row_ids, count=int(row_ids.size), protected_count=protected)
