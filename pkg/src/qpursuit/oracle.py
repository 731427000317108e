"""Exhaustive ground truth: the globally optimal s-support for small problems.

Enumerates every s-subset of columns, solves the least-squares fit for
each, and returns the support with the smallest residual norm. Guarded by
a budget on the number of subsets so it is only used at cross-checking
scales.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .errors import EnumerationGuard
from .linalg import as_sensing_matrix

ENUMERATION_LIMIT = 2_000_000


def best_support(M, b, s):
    """The s-support minimizing ||M_S c - b||, by exhaustive enumeration.

    Ties break toward the lexicographically smallest support (enumeration
    order). Returns (support, coefficients, residual_norm).

    Raises
    ------
    EnumerationGuard
        If C(n, s) exceeds ENUMERATION_LIMIT.
    """
    sm = as_sensing_matrix(M)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != sm.rows:
        raise ValueError("measurement length does not match matrix rows")
    n = sm.cols
    s = int(s)
    if not 1 <= s <= n:
        raise ValueError("sparsity must satisfy 1 <= s <= n")
    count = comb(n, s)
    if count > ENUMERATION_LIMIT:
        raise EnumerationGuard(n, s, count, ENUMERATION_LIMIT)
    A = sm.entries
    best = None
    for support in combinations(range(n), s):
        sub = A[:, support]
        coeff, *_ = np.linalg.lstsq(sub, b, rcond=None)
        rn = float(np.linalg.norm(b - sub @ coeff))
        if best is None or rn < best[0]:
            best = (rn, support, coeff)
    rn, support, coeff = best
    return tuple(support), np.asarray(coeff), rn
