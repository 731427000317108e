"""Coherence and restricted-isometry diagnostics.

Mutual coherence with its deterministic lower bound, an empirical check of
the coherence decay law mu <= 1/f(m) with f(m) = sqrt(m)/log(m), the exact
order-2 isometry constant, and the closed-form linear decay rate for the
pair-wise pursuit residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionViolated
from .linalg import as_sensing_matrix, normalize_columns
from .sampling import derive_seed, gaussian_matrix


@dataclass(frozen=True)
class CoherenceReport:
    """Mutual coherence of a matrix plus derived diagnostics.

    mu: max absolute normalized inner product over distinct column pairs.
    argmax_pair: the (i, j), i < j, attaining mu.
    welch_lower: deterministic lower bound for unit-norm frames.
    f_value: sqrt(m)/log(m) at the matrix's row count.
    mu_times_f: mu * f_value, the decay-law statistic.
    """

    mu: float
    argmax_pair: tuple
    welch_lower: float
    f_value: float
    mu_times_f: float


@dataclass(frozen=True)
class DecayCheckRow:
    """One row of the coherence decay table."""

    m: int
    mean_mu: float
    mean_mu_f: float
    fraction_bounded: float


@dataclass(frozen=True)
class DecayRateReport:
    """Empirical versus closed-form residual decay for one recovery run."""

    empirical_alpha: float
    theoretical_alpha: float
    K: int
    delta2: float
    mu: float


def coherence_f(m):
    """The decay-law scale f(m) = sqrt(m) / log(m), natural logarithm."""
    m = int(m)
    if m < 2:
        raise ValueError("f(m) requires m >= 2")
    return float(np.sqrt(m) / np.log(m))


def welch_lower_bound(m, n):
    """Deterministic coherence lower bound sqrt((n-m)/(m(n-1))) for n > m.

    Returns 0 when n <= m (the bound is vacuous for square or tall frames).
    """
    m = int(m)
    n = int(n)
    if m < 1 or n < 2:
        raise ValueError("requires m >= 1 and n >= 2")
    if n <= m:
        return 0.0
    return float(np.sqrt((n - m) / (m * (n - 1))))


def _offdiag_gram(M):
    sm = as_sensing_matrix(M)
    if sm.cols < 2:
        raise ValueError("coherence requires at least two columns")
    nm = sm if sm.normalized else normalize_columns(sm)
    G = nm.entries.T @ nm.entries
    return sm, np.abs(G)


def mutual_coherence(M):
    """Mutual coherence and its attaining pair, with Welch-bound context.

    Ties in the maximizing pair break lexicographically on (i, j).
    """
    sm, A = _offdiag_gram(M)
    n = A.shape[0]
    # Keep only the strict upper triangle.
    A[np.tril_indices(n)] = -1.0
    flat = int(np.argmax(A))
    i, j = divmod(flat, n)
    mu = float(A[i, j])
    f = coherence_f(sm.rows) if sm.rows >= 2 else float("nan")
    return CoherenceReport(
        mu=mu,
        argmax_pair=(int(i), int(j)),
        welch_lower=welch_lower_bound(sm.rows, sm.cols),
        f_value=f,
        mu_times_f=mu * f,
    )


def exact_delta2(M):
    """Exact order-2 isometry constant of a column-normalized matrix.

    For each pair the 2 x 2 Gram matrix [[1, g], [g, 1]] has eigenvalues
    1 +/- g, so the worst spectral deviation from 1 over all pairs is
    max |g|, which coincides with the mutual coherence. Computed exactly
    over all pairs.
    """
    sm = as_sensing_matrix(M)
    if not sm.normalized:
        raise ValueError("exact_delta2 requires a column-normalized matrix")
    _, A = _offdiag_gram(sm)
    np.fill_diagonal(A, -1.0)
    return float(np.max(A))


def coherence_decay_check(m_values, aspect, trials, seed):
    """Empirical check of the decay law mu * f(m) <= 1 on random matrices.

    For each m, ``trials`` Gaussian matrices of shape (m, round(aspect*m))
    are generated from seeds derived per (m, trial), normalized, and their
    coherences aggregated. Output is bit-reproducible for a fixed seed.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be positive")
    rows = []
    for m in m_values:
        m = int(m)
        if m < 8:
            raise ValueError("decay check requires m >= 8")
        n = int(round(float(aspect) * m))
        f = coherence_f(m)
        mus = np.empty(trials)
        for t in range(trials):
            mat = gaussian_matrix(m, n, derive_seed(seed, m, t))
            mus[t] = mutual_coherence(mat).mu
        rows.append(
            DecayCheckRow(
                m=m,
                mean_mu=float(np.mean(mus)),
                mean_mu_f=float(np.mean(mus * f)),
                fraction_bounded=float(np.mean(mus * f <= 1.0)),
            )
        )
    return rows


def theoretical_alpha(m, n, K, delta2, mu):
    """Closed-form per-iteration residual decay factor for pair-wise pursuit.

    alpha = 1 - (1-delta2)(1-mu)(n-2K-m+2) / (4m(n-2K+1)).

    Valid for n >= 2m and 1 <= K <= m/2 with delta2, mu in [0, 1]; under
    those conditions n - 2K - m + 2 > 0 and alpha lies in (0, 1), reaching
    the degenerate value 1 at the delta2 = 1 or mu = 1 boundary.
    """
    m = int(m)
    n = int(n)
    K = int(K)
    delta2 = float(delta2)
    mu = float(mu)
    if n < 2 * m:
        raise PreconditionViolated(f"requires n >= 2m, got n={n}, m={m}")
    if not 1 <= K or 2 * K > m:
        raise PreconditionViolated(f"requires 1 <= K <= m/2, got K={K}, m={m}")
    if not (0.0 <= delta2 <= 1.0 and 0.0 <= mu <= 1.0):
        raise PreconditionViolated("delta2 and mu must lie in [0, 1]")
    return 1.0 - (1.0 - delta2) * (1.0 - mu) * (n - 2 * K - m + 2) / (
        4.0 * m * (n - 2 * K + 1)
    )


def residual_decay_report(result, M, K):
    """Empirical worst-step decay ratio of a run versus the closed form.

    empirical_alpha is the maximum over consecutive residual-norm pairs of
    ||r_k||^2 / ||r_{k-1}||^2; steps whose previous squared norm is below
    1e-20 are skipped (recovery already complete). The closed form is
    evaluated with the matrix's exact order-2 constant and coherence.
    """
    history = np.asarray(result.residual_history, dtype=np.float64)
    if history.size < 2:
        raise ValueError("residual history needs at least two entries")
    sq = history * history
    prev = sq[:-1]
    cur = sq[1:]
    valid = prev >= 1e-20
    empirical = float(np.max(cur[valid] / prev[valid])) if np.any(valid) else 0.0
    sm = as_sensing_matrix(M)
    nm = sm if sm.normalized else normalize_columns(sm)
    mu = mutual_coherence(nm).mu
    d2 = exact_delta2(nm)
    theo = theoretical_alpha(sm.rows, sm.cols, K, d2, mu)
    return DecayRateReport(
        empirical_alpha=empirical,
        theoretical_alpha=theo,
        K=int(K),
        delta2=d2,
        mu=mu,
    )
