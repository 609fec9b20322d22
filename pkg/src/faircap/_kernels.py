"""Hot aggregation kernels with a numba fast path and a pure-numpy fallback.

Rulesets are passed CSR-style: ``indptr``/``indices`` map rule j to the sorted
row ids it covers, ``utils[j]`` is its utility. Both implementations compute
the same quantities and each is deterministic run to run; the final float
reductions may differ between the two paths by rounding ulps only.

Set ``FAIRCAP_JIT=0`` to force the numpy path (the default uses numba when it
imports). ``benchmarks/bench_kernels.py`` times the two paths side by side.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("FAIRCAP_JIT", "1").strip().lower()
JIT_REQUESTED = _FLAG not in ("0", "off", "false", "numpy")


def ruleset_utility_parts_numpy(indptr, indices, utils, protected):
    """Per-row best/worst covering utility, reduced to the six ruleset sums.

    Returns ``(sum_max_covered, n_covered, sum_min_protected, n_covered_protected,
    sum_max_nonprotected, n_covered_nonprotected)``.
    """
    n = protected.shape[0]
    best = np.full(n, -np.inf)
    worst = np.full(n, np.inf)
    covered = np.zeros(n, dtype=np.bool_)
    m = utils.shape[0]
    for j in range(m):
        rows = indices[indptr[j] : indptr[j + 1]]
        u = utils[j]
        covered[rows] = True
        best[rows] = np.maximum(best[rows], u)
        worst[rows] = np.minimum(worst[rows], u)
    cov_p = covered & protected
    cov_np = covered & ~protected
    return (
        float(best[covered].sum()) if covered.any() else 0.0,
        int(covered.sum()),
        float(worst[cov_p].sum()) if cov_p.any() else 0.0,
        int(cov_p.sum()),
        float(best[cov_np].sum()) if cov_np.any() else 0.0,
        int(cov_np.sum()),
    )


def candidate_stats_numpy(best, covered, protected, indptr, indices, utils):
    """Marginal expected-utility gain and new-coverage counts per candidate.

    ``best`` holds the current max covering utility per row (only meaningful
    where ``covered``). Returns ``(gains, new_rows, new_protected)`` arrays.
    """
    m = utils.shape[0]
    gains = np.zeros(m)
    new_rows = np.zeros(m, dtype=np.int64)
    new_prot = np.zeros(m, dtype=np.int64)
    for j in range(m):
        rows = indices[indptr[j] : indptr[j + 1]]
        u = utils[j]
        cov = covered[rows]
        old = best[rows[cov]]
        diff = u - old
        gains[j] = float(diff[diff > 0].sum()) + float(u) * int((~cov).sum())
        new_rows[j] = int((~cov).sum())
        new_prot[j] = int(protected[rows[~cov]].sum())
    return gains, new_rows, new_prot


def _parts_loop(indptr, indices, utils, protected):
    n = protected.shape[0]
    best = np.full(n, -np.inf)
    worst = np.full(n, np.inf)
    covered = np.zeros(n, dtype=np.bool_)
    m = utils.shape[0]
    for j in range(m):
        u = utils[j]
        for k in range(indptr[j], indptr[j + 1]):
            i = indices[k]
            covered[i] = True
            if u > best[i]:
                best[i] = u
            if u < worst[i]:
                worst[i] = u
    s_max = 0.0
    n_cov = 0
    s_min_p = 0.0
    n_cov_p = 0
    s_max_np = 0.0
    n_cov_np = 0
    for i in range(n):
        if covered[i]:
            n_cov += 1
            s_max += best[i]
            if protected[i]:
                n_cov_p += 1
                s_min_p += worst[i]
            else:
                n_cov_np += 1
                s_max_np += best[i]
    return s_max, n_cov, s_min_p, n_cov_p, s_max_np, n_cov_np


def _stats_loop(best, covered, protected, indptr, indices, utils):
    m = utils.shape[0]
    gains = np.zeros(m)
    new_rows = np.zeros(m, dtype=np.int64)
    new_prot = np.zeros(m, dtype=np.int64)
    for j in range(m):
        u = utils[j]
        g = 0.0
        nr = 0
        nps = 0
        for k in range(indptr[j], indptr[j + 1]):
            i = indices[k]
            if covered[i]:
                d = u - best[i]
                if d > 0.0:
                    g += d
            else:
                g += u
                nr += 1
                if protected[i]:
                    nps += 1
        gains[j] = g
        new_rows[j] = nr
        new_prot[j] = nps
    return gains, new_rows, new_prot


HAVE_NUMBA = False
if JIT_REQUESTED:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False

if HAVE_NUMBA:
    ruleset_utility_parts_jit = njit(cache=True)(_parts_loop)
    candidate_stats_jit = njit(cache=True)(_stats_loop)
    ruleset_utility_parts = ruleset_utility_parts_jit
    candidate_stats = candidate_stats_jit
    ACTIVE_IMPL = "numba"
else:
    ruleset_utility_parts = ruleset_utility_parts_numpy
    candidate_stats = candidate_stats_numpy
    ACTIVE_IMPL = "numpy"


def build_csr(row_id_arrays) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-rule row-id arrays into (indptr, indices)."""
    sizes = np.fromiter((a.size for a in row_id_arrays), dtype=np.int64, count=len(row_id_arrays))
    indptr = np.zeros(sizes.size + 1, dtype=np.int64)
    np.cumsum(sizes, out=indptr[1:])
    if row_id_arrays:
        indices = np.concatenate([np.asarray(a, dtype=np.int64) for a in row_id_arrays])
    else:
        indices = np.zeros(0, dtype=np.int64)
    return indptr, indices
