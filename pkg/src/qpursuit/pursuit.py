"""Greedy sparse recovery: OMP, generalized OMP, and pair-wise pursuit.

All three algorithms share the same conventions: the matrix is normalized
internally (callers may pass raw matrices), selections never repeat, every
iteration refits by least squares on the accumulated support and the
residual history is non-increasing. Output coefficients are rescaled by the
stored original column norms, so estimates live in the caller's column
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoAdmissiblePair, RankDeficient
from .linalg import (
    Residual,
    SparseSignal,
    as_sensing_matrix,
    least_squares_on_support,
    normalize_columns,
)
from .pair_search import ExclusionSet, PairSearchConfig, select_best_pair

DEFAULT_TOL_FACTOR = 1e-9


@dataclass(frozen=True)
class StoppingRule:
    """Iteration budget plus residual tolerance.

    residual_tolerance is an absolute Euclidean norm threshold; None means
    the relative default 1e-9 * ||b|| resolved at run time.
    """

    max_iterations: int
    residual_tolerance: float | None = None

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be positive")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        if self.residual_tolerance is not None:
            tol = float(self.residual_tolerance)
            if tol < 0:
                raise ValueError("residual_tolerance must be nonnegative")
            object.__setattr__(self, "residual_tolerance", tol)

    def tolerance_for(self, b_norm):
        if self.residual_tolerance is None:
            return DEFAULT_TOL_FACTOR * float(b_norm)
        return self.residual_tolerance


@dataclass
class RecoveryResult:
    """Outcome of one recovery run.

    support: selected indices in order of selection (drops removed).
    estimate: sparse estimate in the original column scale.
    selection_history: per iteration, the indices added (ascending).
    residual_history: ||r_k|| per iteration, starting at ||r_0|| = ||b||.
    dropped: (iteration, index) pairs removed by rank-deficient refits.
    """

    support: list
    estimate: SparseSignal
    iterations_run: int
    selection_history: list = field(default_factory=list)
    residual_history: np.ndarray = field(default_factory=lambda: np.zeros(1))
    dropped: list = field(default_factory=list)


def _prepare(M, b):
    sm = as_sensing_matrix(M)
    normalized = sm if sm.normalized else normalize_columns(sm)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != sm.rows:
        raise ValueError("measurement length does not match matrix rows")
    if not np.all(np.isfinite(b)):
        raise ValueError("measurement must be finite")
    # Original-scale coefficients divide by the stored pre-normalization
    # norms, whether the caller or this module did the normalizing.
    return sm, normalized, b, sm.column_norms


def _build_estimate(n, support, coeff, scale):
    if len(support) == 0:
        return SparseSignal(n, [], [])
    idx = np.asarray(support, dtype=np.int64)
    vals = np.asarray(coeff, dtype=np.float64) / scale[idx]
    order = np.argsort(idx)
    idx = idx[order]
    vals = vals[order]
    keep = vals != 0.0
    return SparseSignal(n, idx[keep], vals[keep])


def _refit_with_drops(sm, support_prev, new, b):
    """Refit on support_prev + new, dropping newest offenders on rank failure.

    support_prev is always full rank, so the loop terminates. Returns the
    kept new indices, coefficients, residual, and the dropped indices.
    """
    keep = list(new)
    dropped = []
    while True:
        try:
            coeff, res = least_squares_on_support(sm, support_prev + keep, b)
            return keep, dropped, coeff, res
        except RankDeficient:
            if not keep:
                raise
            # Prefer removing a single column, newest first.
            for t in range(len(keep) - 1, -1, -1):
                trial = keep[:t] + keep[t + 1 :]
                if not support_prev and not trial:
                    continue
                try:
                    coeff, res = least_squares_on_support(sm, support_prev + trial, b)
                    dropped.append(keep[t])
                    return trial, dropped, coeff, res
                except RankDeficient:
                    continue
            # Multiple offenders: shed the newest and retry.
            dropped.append(keep.pop())
            if not support_prev and not keep:
                raise RankDeficient(new, 0)


def _greedy_pursuit(M, b, n_select, stop):
    sm, nm, b, scale = _prepare(M, b)
    m, n = sm.rows, sm.cols
    if n_select < 1:
        raise ValueError("n_select must be positive")
    if n_select * stop.max_iterations > m:
        raise ValueError(
            f"budget {stop.max_iterations} x {n_select} columns exceeds {m} rows"
        )
    An = nm.entries
    used = np.zeros(n, dtype=bool)
    support = []
    coeff = np.zeros(0)
    r = b.copy()
    rn = float(np.linalg.norm(b))
    tol = stop.tolerance_for(rn)
    history = [rn]
    selections = []
    dropped_log = []
    k = 0
    while k < stop.max_iterations and rn > tol:
        corr = np.abs(An.T @ r)
        corr[used] = -1.0
        order = np.argsort(-corr, kind="stable")
        fresh = [int(i) for i in order[:n_select] if corr[i] > 0.0]
        if not fresh:
            # Residual exactly orthogonal to every remaining column.
            break
        exhausted = len(fresh) < n_select
        k += 1
        used[fresh] = True
        kept, drops, new_coeff, res = _refit_with_drops(nm, support, fresh, b)
        support += kept
        coeff = new_coeff
        r = res.vector.copy()
        rn = res.norm
        selections.append(sorted(kept))
        dropped_log.extend((k, d) for d in drops)
        history.append(rn)
        if exhausted:
            break
    estimate = _build_estimate(n, support, coeff, scale)
    return RecoveryResult(
        support=support,
        estimate=estimate,
        iterations_run=k,
        selection_history=selections,
        residual_history=np.asarray(history),
        dropped=dropped_log,
    )


def omp(M, b, stop):
    """Orthogonal matching pursuit.

    Each iteration adds the single index with the largest absolute
    correlation to the current residual (ties go to the lowest index),
    refits on the accumulated support, and stops at the iteration budget or
    when the residual norm falls to the tolerance. Requires
    max_iterations < m.
    """
    sm = as_sensing_matrix(M)
    if stop.max_iterations >= sm.rows:
        raise ValueError("omp requires max_iterations < number of rows")
    return _greedy_pursuit(sm, b, 1, stop)


def gomp(M, b, n_select, stop):
    """Generalized OMP: add the n_select best-correlated indices per iteration.

    Ties go to lower indices. If fewer than n_select fresh indices remain,
    the remainder is added and the run stops after that refit. Requires
    n_select * max_iterations <= m.
    """
    return _greedy_pursuit(M, b, int(n_select), stop)


def qomp(M, b, stop, pair_config=None):
    """Pair-wise pursuit: add the best residual-reducing pair per iteration.

    Each iteration the pair (i < j) minimizing the two-column residual over
    all non-excluded, non-collinear pairs is added to the support, both
    indices join the exclusion set, and the estimate is refit on the full
    accumulated support. For an s-sparse target the conventional budget is
    max_iterations = s, selecting 2s columns. Requires
    2 * max_iterations <= m.

    A run stops early (with the result so far) if no admissible pair
    remains or the best pair gives no strict residual decrease.
    """
    sm, nm, b, scale = _prepare(M, b)
    m, n = sm.rows, sm.cols
    if 2 * stop.max_iterations > m:
        raise ValueError("qomp requires 2 * max_iterations <= number of rows")
    if m < 2:
        raise ValueError("qomp requires at least two rows")
    config = pair_config or PairSearchConfig()
    An = nm.entries
    gram = An.T @ An if config.use_gram(n) else None
    excl = ExclusionSet()
    support = []
    coeff = np.zeros(0)
    r = b.copy()
    rr = float(r @ r)
    rn = float(np.sqrt(rr))
    tol = stop.tolerance_for(rn)
    history = [rn]
    selections = []
    dropped_log = []
    k = 0
    while k < stop.max_iterations and rn > tol:
        try:
            sel = select_best_pair(nm, Residual(r, rr), excl, config, gram=gram)
        except NoAdmissiblePair:
            break
        if sel.residual_sq >= rr:
            # No strict decrease available: residual is orthogonal to every
            # remaining candidate.
            break
        k += 1
        excl.add(sel.i, sel.j)
        kept, drops, new_coeff, res = _refit_with_drops(nm, support, [sel.i, sel.j], b)
        support += kept
        coeff = new_coeff
        r = res.vector.copy()
        rr = res.norm_sq
        rn = res.norm
        selections.append(sorted(kept))
        dropped_log.extend((k, d) for d in drops)
        history.append(rn)
    estimate = _build_estimate(n, support, coeff, scale)
    return RecoveryResult(
        support=support,
        estimate=estimate,
        iterations_run=k,
        selection_history=selections,
        residual_history=np.asarray(history),
        dropped=dropped_log,
    )


def refine_support(M, support, b):
    """Sparse least squares on a candidate support via greedy orthogonalization.

    Columns of M restricted to ``support`` are orthogonalized greedily in
    order of largest remaining-residual reduction, stopping at the
    effective rank (so duplicated or dependent columns are discarded); the
    returned estimate carries least-squares coefficients on the retained
    indices. With a full-rank support all indices are retained.
    """
    sm = as_sensing_matrix(M)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != sm.rows:
        raise ValueError("measurement length does not match matrix rows")
    idx = []
    seen = set()
    for i in support:
        i = int(i)
        if i not in seen:
            seen.add(i)
            idx.append(i)
    if not idx:
        return SparseSignal(sm.cols, [], [])

    W = np.array(sm.entries[:, idx], dtype=np.float64)
    r = b.copy()
    nu = np.linalg.norm(W, axis=0)
    tol = 1e-10 * float(np.max(nu)) if nu.size else 0.0
    remaining = list(range(len(idx)))
    chosen = []
    while remaining:
        cols = np.array(remaining)
        norms = np.linalg.norm(W[:, cols], axis=0)
        viable = norms > tol
        if not np.any(viable):
            break
        reduction = np.zeros(cols.size)
        reduction[viable] = np.abs(W[:, cols[viable]].T @ r) / norms[viable]
        reduction[~viable] = -1.0
        pick = int(cols[int(np.argmax(reduction))])
        q = W[:, pick] / np.linalg.norm(W[:, pick])
        proj = q @ W
        W -= np.outer(q, proj)
        r = r - (q @ r) * q
        chosen.append(pick)
        remaining.remove(pick)
    retained = [idx[t] for t in chosen]
    if not retained:
        return SparseSignal(sm.cols, [], [])
    try:
        coeff, _ = least_squares_on_support(sm, retained, b)
    except RankDeficient as err:
        # Tolerance metrics can disagree near the rank boundary; fall back
        # to the factorization's own independent subset.
        retained = list(err.independent)
        if not retained:
            return SparseSignal(sm.cols, [], [])
        coeff, _ = least_squares_on_support(sm, retained, b)
    return _build_estimate(sm.cols, retained, coeff, np.ones(sm.cols))
