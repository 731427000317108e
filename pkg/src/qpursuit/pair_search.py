"""Exhaustive search for the column pair that best explains a residual.

Every admissible pair (i, j), i < j, is scored by the squared residual left
after projecting onto the two columns, and the minimizer is returned with
lexicographic tie-breaking. Scoring is organized so the result is
bit-identical regardless of chunking or thread count: per-candidate
correlations are computed once per search with a single matrix-vector
product, inner products between columns come from one shared Gram matrix
(or full-row products when the cache is off), and the merge compares exact
(score, i, j) tuples.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoAdmissiblePair
from .linalg import COLLINEARITY_TOL, Residual, as_sensing_matrix

_GRAM_CACHE_MAX_N = 4096


@dataclass(frozen=True)
class PairSelection:
    """An ordered index pair with its squared pair residual."""

    i: int
    j: int
    residual_sq: float


class ExclusionSet:
    """Column indices barred from pair selection; grows monotonically."""

    def __init__(self, indices=()):
        self.excluded = set(int(i) for i in indices)

    def add(self, *indices):
        self.excluded.update(int(i) for i in indices)

    def __contains__(self, index):
        return int(index) in self.excluded

    def __len__(self):
        return len(self.excluded)

    def mask(self, n):
        """Boolean mask of length n, True at excluded indices."""
        m = np.zeros(n, dtype=bool)
        if self.excluded:
            m[np.fromiter(self.excluded, dtype=np.int64)] = True
        return m


@dataclass(frozen=True)
class PairSearchConfig:
    """Tuning knobs for the pair search.

    gram_cache: precompute the full Gram matrix (None = auto, on when
    n <= 4096). chunk_size: rows of the pair enumeration scored per block.
    max_threads: worker threads for block scoring; results are identical
    for any thread count.
    """

    gram_cache: bool | None = None
    chunk_size: int = 256
    max_threads: int = 1

    def use_gram(self, n):
        if self.gram_cache is None:
            return n <= _GRAM_CACHE_MAX_N
        return bool(self.gram_cache)


def total_pair_count(n):
    """Number of pairs (i, j) with 0 <= i < j < n."""
    return n * (n - 1) // 2


def _row_offsets(n):
    # offsets[i] = linear index of pair (i, i+1); offsets[n-1] = total count.
    counts = n - 1 - np.arange(n, dtype=np.int64)
    return np.concatenate(([0], np.cumsum(counts)))


def _require_normalized(sm):
    if not sm.normalized:
        norms = np.linalg.norm(sm.entries, axis=0)
        if norms.size == 0 or np.max(np.abs(norms - 1.0)) > 1e-8:
            raise ValueError("pair search requires a column-normalized matrix")


def _score_block(An, c, rr, G, i0, i1, excl_mask):
    """Scores for pair rows i0..i1-1 against all columns; inadmissible = +inf."""
    n = An.shape[1]
    if G is not None:
        g = G[i0:i1, :]
    else:
        g = An[:, i0:i1].T @ An
    ci = c[i0:i1][:, None]
    cj = c[None, :]
    num = ci * ci + cj * cj - 2.0 * g * (ci * cj)
    den = 1.0 - g * g
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = rr - num / den
    scores[den < COLLINEARITY_TOL] = np.inf
    cols = np.arange(n)[None, :]
    rows = np.arange(i0, i1)[:, None]
    scores[cols <= rows] = np.inf
    if excl_mask is not None:
        scores[:, excl_mask] = np.inf
        scores[excl_mask[i0:i1], :] = np.inf
    return scores


def _block_best(An, c, rr, G, i0, i1, excl_mask):
    scores = _score_block(An, c, rr, G, i0, i1, excl_mask)
    flat = int(np.argmin(scores))
    bi, j = divmod(flat, An.shape[1])
    return float(scores[bi, j]), i0 + bi, j


def select_best_pair(M, r, excl=None, config=None, gram=None):
    """The admissible pair (i < j) with minimal squared pair residual.

    Ties break lexicographically on (i, j). Excluded columns and
    near-collinear pairs never win. The result is deterministic for any
    chunk size or thread count.

    Parameters
    ----------
    M : SensingMatrix
        Must be column normalized.
    r : Residual or ndarray
    excl : ExclusionSet, optional
    config : PairSearchConfig, optional
    gram : ndarray, optional
        Precomputed M.entries.T @ M.entries, to share across searches.

    Raises
    ------
    NoAdmissiblePair
        If fewer than two columns are free or every pair is near collinear.
    """
    sm = as_sensing_matrix(M)
    _require_normalized(sm)
    config = config or PairSearchConfig()
    An = sm.entries
    n = sm.cols
    excl_mask = excl.mask(n) if excl is not None and len(excl) else None
    free = n - (int(np.sum(excl_mask)) if excl_mask is not None else 0)
    if free < 2:
        raise NoAdmissiblePair(f"only {free} non-excluded columns remain")
    if isinstance(r, Residual):
        rvec, rr = r.vector, r.norm_sq
    else:
        rvec = np.asarray(r, dtype=np.float64).ravel()
        rr = float(rvec @ rvec)
    c = An.T @ rvec
    G = gram
    if G is None and config.use_gram(n):
        G = An.T @ An

    step = max(1, int(config.chunk_size))
    blocks = [(i0, min(i0 + step, n - 1)) for i0 in range(0, n - 1, step)]
    if config.max_threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=config.max_threads) as pool:
            candidates = list(
                pool.map(lambda blk: _block_best(An, c, rr, G, *blk, excl_mask), blocks)
            )
    else:
        candidates = [_block_best(An, c, rr, G, *blk, excl_mask) for blk in blocks]

    best = min(candidates)
    if not np.isfinite(best[0]):
        raise NoAdmissiblePair("every candidate pair is excluded or near collinear")
    return PairSelection(int(best[1]), int(best[2]), float(best[0]))


def evaluate_pair_block(M, r, pair_range, config=None, gram=None):
    """Score one contiguous chunk of the lexicographic pair enumeration.

    ``pair_range`` is a (start, stop) slice of the linear enumeration of all
    pairs (i, j), i < j, ordered by (i, j). Returns a list of
    (i, j, residual_sq) in enumeration order. Near-collinear pairs get a
    +inf sentinel instead of raising; no exclusion is applied. Disjoint
    chunks may be evaluated concurrently and merged: the concatenation over
    the full range reproduces the serial enumeration, and a min-merge with
    lexicographic tie-breaking reproduces select_best_pair.
    """
    sm = as_sensing_matrix(M)
    _require_normalized(sm)
    config = config or PairSearchConfig()
    An = sm.entries
    n = sm.cols
    start, stop = (int(pair_range[0]), int(pair_range[1]))
    total = total_pair_count(n)
    if not 0 <= start <= stop <= total:
        raise ValueError(f"pair_range must lie within [0, {total}]")
    if isinstance(r, Residual):
        rvec, rr = r.vector, r.norm_sq
    else:
        rvec = np.asarray(r, dtype=np.float64).ravel()
        rr = float(rvec @ rvec)
    c = An.T @ rvec
    G = gram
    if G is None and config.use_gram(n):
        G = An.T @ An

    offsets = _row_offsets(n)
    out = []
    pos = start
    i = int(np.searchsorted(offsets, start, side="right") - 1)
    while pos < stop:
        row_start = int(offsets[i])
        row_end = int(offsets[i + 1])
        j0 = i + 1 + (pos - row_start)
        j1 = i + 1 + (min(stop, row_end) - row_start)
        if G is not None:
            g = G[i, j0:j1]
        else:
            # Full-row product then slice, so values do not depend on the
            # chunk boundaries.
            g = (An[:, i] @ An)[j0:j1]
        ci = c[i]
        cj = c[j0:j1]
        num = ci * ci + cj * cj - 2.0 * g * (ci * cj)
        den = 1.0 - g * g
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = rr - num / den
        scores = np.where(den < COLLINEARITY_TOL, np.inf, scores)
        out.extend(
            (i, int(j), float(s)) for j, s in zip(range(j0, j1), np.atleast_1d(scores))
        )
        pos = min(stop, row_end)
        i += 1
    return out
