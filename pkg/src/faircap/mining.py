"""Frequent grouping-pattern mining over immutable attributes (Apriori).

Items are (attribute, value) equality pairs; candidate generation is the
classic prefix join with downward-closure pruning, so every sub-pattern of a
mined pattern also clears the support threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .data import CoverageSet, Dataset, Pattern, Predicate, Role
from .errors import NoPatterns

Item = tuple[str, str]  # (attribute name, categorical value label)


@dataclass(frozen=True, eq=False)
class GroupingCandidate:
    pattern: Pattern
    support: float
    coverage: CoverageSet


def _item_pattern(items: Iterable[Item]) -> Pattern:
    return Pattern(Predicate(attr, "=", value) for attr, value in items)


def mine_grouping_patterns(
    dataset: Dataset,
    relevant_attrs: Iterable[str],
    apriori_support: float = 0.1,
    max_len: int = 3,
) -> list[GroupingCandidate]:
    """All equality conjunctions of length 1..max_len with enough support.

    ``relevant_attrs`` should already be intersected with the causally
    relevant immutable attributes. Only categorical attributes produce items
    (continuous attributes are binned upstream).
    """
    if not (0.0 < apriori_support <= 1.0):
        raise ValueError("apriori_support must lie in (0, 1]")
    n = dataset.n
    immutable = set(dataset.attributes_with_role(Role.IMMUTABLE))
    attrs = sorted(set(relevant_attrs) & immutable)

    item_masks: dict[Item, np.ndarray] = {}
    for attr in attrs:
        spec = dataset.attribute(attr)
        if not spec.is_categorical:
            continue
        col = dataset.columns[attr]
        counts = np.bincount(col, minlength=len(spec.domain.values))
        for code, value in enumerate(spec.domain.values):
            if counts[code] / n >= apriori_support:
                item_masks[(attr, value)] = col == code

    if not item_masks:
        raise NoPatterns(
            f"no single item reaches support {apriori_support} over {len(attrs)} attributes"
        )

    frequent: dict[tuple[Item, ...], np.ndarray] = {
        (item,): mask for item, mask in item_masks.items()
    }
    levels = [frequent]
    while len(levels) < max_len:
        prev = levels[-1]
        keys = sorted(prev.keys())
        nxt: dict[tuple[Item, ...], np.ndarray] = {}
        for a, b in combinations(keys, 2):
            if a[:-1] != b[:-1]:
                continue
            if a[-1][0] == b[-1][0]:
                continue  # one equality predicate per attribute
            cand = a + (b[-1],)
            if any(
                sub not in prev
                for sub in (cand[:i] + cand[i + 1 :] for i in range(len(cand)))
            ):
                continue
            mask = prev[a] & item_masks[cand[-1]]
            if int(mask.sum()) / n >= apriori_support:
                nxt[cand] = mask
        if not nxt:
            break
        levels.append(nxt)

    out = []
    for level in levels:
        for items, mask in level.items():
            row_ids = np.flatnonzero(mask).astype(np.int64)
            cov = CoverageSet(
                row_ids=row_ids,
                count=int(row_ids.size),
                protected_count=int(dataset.protected_mask[row_ids].sum()),
            )
            out.append(
                GroupingCandidate(
                    pattern=_item_pattern(items),
                    support=cov.count / n,
                    coverage=cov,
                )
            )
    out.sort(key=lambda c: (-c.support, c.pattern.sort_key()))
    return out
