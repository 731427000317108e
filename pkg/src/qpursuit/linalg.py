"""Dense linear-algebra kernels for greedy sparse recovery.

Column-normalized sensing matrices, least squares restricted to a column
subset, and the closed-form projection of a vector onto the span of two
unit columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NearCollinearPair, RankDeficient, ZeroColumn

# Pairs with 1 - (phi_i^T phi_j)^2 below this are rejected outright: the
# closed form divides by that quantity, and such pairs cannot win anyway.
COLLINEARITY_TOL = 1e-10

# Effective rank is counted against this fraction of the leading factor
# diagonal in pivoted QR.
RANK_RTOL = 1e-10

_ZERO_NORM_FLOOR = 1e-300


def _lock(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SensingMatrix:
    """Dense m x n measurement operator with per-column norm metadata.

    Parameters
    ----------
    entries : ndarray of shape (m, n)
        Matrix entries, stored column-major (Fortran order) internally.
    column_norms : ndarray of shape (n,)
        Euclidean norm of each column. When ``normalized`` is true these
        are the norms of the original, pre-normalization columns.
    normalized : bool
        True when every column of ``entries`` has unit norm.
    """

    entries: np.ndarray
    column_norms: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        entries = np.asfortranarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValueError("entries must be a 2-d array with positive shape")
        if not np.all(np.isfinite(entries)):
            raise ValueError("entries must be finite")
        norms = np.asarray(self.column_norms, dtype=np.float64)
        if norms.shape != (entries.shape[1],):
            raise ValueError("column_norms must have one entry per column")
        object.__setattr__(self, "entries", _lock(entries))
        object.__setattr__(self, "column_norms", _lock(norms))
        object.__setattr__(self, "normalized", bool(self.normalized))

    @classmethod
    def from_array(cls, arr):
        """Wrap a dense array, computing column norms and the unit-norm flag."""
        arr = np.asfortranarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        norms = np.linalg.norm(arr, axis=0)
        normalized = bool(norms.size and np.max(np.abs(norms - 1.0)) <= 1e-12)
        return cls(arr, norms, normalized)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]


def as_sensing_matrix(M):
    """Coerce an array or SensingMatrix to SensingMatrix."""
    if isinstance(M, SensingMatrix):
        return M
    return SensingMatrix.from_array(np.asarray(M, dtype=np.float64))


@dataclass(frozen=True)
class SparseSignal:
    """A vector stored as a strictly increasing support plus nonzero values.

    An empty support represents the zero vector (used for estimates of
    degenerate inputs); generated problem signals always have sparsity >= 1.
    """

    dimension: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = int(self.dimension)
        if n < 1:
            raise ValueError("dimension must be positive")
        support = np.asarray(self.support, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if support.shape != values.shape:
            raise ValueError("support and values must have equal length")
        if support.size:
            if support[0] < 0 or support[-1] >= n or np.any(np.diff(support) <= 0):
                raise ValueError("support must be strictly increasing within [0, n)")
            if np.any(values == 0.0):
                raise ValueError("values must be nonzero")
        object.__setattr__(self, "dimension", n)
        object.__setattr__(self, "support", _lock(support))
        object.__setattr__(self, "values", _lock(values))

    @property
    def sparsity(self):
        return int(self.support.size)

    def to_dense(self):
        """Return the length-n dense vector."""
        x = np.zeros(self.dimension)
        x[self.support] = self.values
        return x

    @classmethod
    def from_dense(cls, x):
        """Build from a dense vector, keeping exactly the nonzero entries."""
        x = np.asarray(x, dtype=np.float64).ravel()
        support = np.flatnonzero(x)
        return cls(x.size, support, x[support])


@dataclass(frozen=True)
class Residual:
    """A residual vector with its squared Euclidean norm cached."""

    vector: np.ndarray
    norm_sq: float

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64).ravel()
        nsq = float(self.norm_sq)
        actual = float(v @ v)
        if abs(nsq - actual) > 1e-10 * max(actual, 1.0):
            raise ValueError("cached norm_sq does not match the vector")
        object.__setattr__(self, "vector", _lock(v))
        object.__setattr__(self, "norm_sq", nsq)

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=np.float64).ravel()
        return cls(v, float(v @ v))

    @property
    def norm(self):
        return float(np.sqrt(self.norm_sq))


def _residual_vector(r):
    if isinstance(r, Residual):
        return r.vector, r.norm_sq
    v = np.asarray(r, dtype=np.float64).ravel()
    return v, float(v @ v)


def normalize_columns(M):
    """Return a copy of M with unit-norm columns.

    The returned matrix has ``normalized=True`` and ``column_norms`` holding
    the norms of the input columns (the pre-normalization metadata). The
    input is left unmodified.

    Raises
    ------
    ZeroColumn
        If any column norm is at or below 1e-300.
    """
    sm = as_sensing_matrix(M)
    norms = np.linalg.norm(sm.entries, axis=0)
    small = np.flatnonzero(norms <= _ZERO_NORM_FLOOR)
    if small.size:
        raise ZeroColumn(small[0])
    entries = sm.entries / norms
    if sm.normalized:
        # Re-normalizing keeps the original norm metadata intact.
        return SensingMatrix(entries, sm.column_norms, True)
    return SensingMatrix(entries, norms, True)


def least_squares_on_support(M, support, b):
    """Least squares of b against the columns of M indexed by ``support``.

    Uses pivoted QR (never explicit normal equations). Coefficients are
    returned in the order of ``support``.

    Returns
    -------
    coefficients : ndarray of shape (len(support),)
    residual : Residual
        b minus the fitted combination, with cached squared norm.

    Raises
    ------
    RankDeficient
        If the selected columns have effective rank below len(support) at
        tolerance RANK_RTOL times the leading factor diagonal. The error
        carries a maximal independent subset; the caller decides how to
        shrink the support.
    """
    sm = as_sensing_matrix(M)
    idx = np.asarray(list(support), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("support must be nonempty")
    if idx.size > sm.rows:
        raise RankDeficient(idx, sm.rows)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != sm.rows:
        raise ValueError("measurement length does not match matrix rows")
    A = sm.entries[:, idx]
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    lead = diag[0] if diag.size else 0.0
    rank = int(np.sum(diag > RANK_RTOL * lead)) if lead > 0.0 else 0
    if rank < idx.size:
        independent = [int(idx[p]) for p in sorted(piv[:rank])]
        raise RankDeficient(idx, rank, independent)
    z = scipy.linalg.solve_triangular(R, Q.T @ b)
    coeff = np.empty(idx.size)
    coeff[piv] = z
    resid = b - A @ coeff
    return coeff, Residual.from_vector(resid)


def pair_projection_coefficients(col_i, col_j, r):
    """Closed-form least squares of a residual against two unit columns.

    With g = col_i^T col_j, c_i = col_i^T r and c_j = col_j^T r, returns

        u = (c_i - g*c_j) / (1 - g^2),  v = (c_j - g*c_i) / (1 - g^2),

    the minimizer of ||u*col_i + v*col_j - r||.

    Raises
    ------
    NearCollinearPair
        If 1 - g^2 falls below COLLINEARITY_TOL.
    """
    ci, cj, g, _ = _pair_inner(col_i, col_j, r)
    den = 1.0 - g * g
    if den < COLLINEARITY_TOL:
        raise NearCollinearPair(-1, -1, g)
    u = (ci - g * cj) / den
    v = (cj - g * ci) / den
    return float(u), float(v)


def pair_residual_sq(col_i, col_j, r):
    """Squared residual after projecting r onto the span of two unit columns.

    Returns ||r||^2 - (c_i^2 + c_j^2 - 2*g*c_i*c_j) / (1 - g^2). The value
    lies in [0, ||r||^2] up to roundoff and is exactly symmetric in the two
    columns.

    Raises
    ------
    NearCollinearPair
        If 1 - g^2 falls below COLLINEARITY_TOL.
    """
    ci, cj, g, rr = _pair_inner(col_i, col_j, r)
    den = 1.0 - g * g
    if den < COLLINEARITY_TOL:
        raise NearCollinearPair(-1, -1, g)
    num = ci * ci + cj * cj - 2.0 * g * (ci * cj)
    return float(rr - num / den)


def _pair_inner(col_i, col_j, r):
    ai = np.asarray(col_i, dtype=np.float64).ravel()
    aj = np.asarray(col_j, dtype=np.float64).ravel()
    v, rr = _residual_vector(r)
    ci = float(ai @ v)
    cj = float(aj @ v)
    g = float(ai @ aj)
    return ci, cj, g, rr
