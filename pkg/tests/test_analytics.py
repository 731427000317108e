"""Tests for coherence, isometry, and decay-rate diagnostics."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from qpursuit import (
    PreconditionViolated,
    StoppingRule,
    coherence_decay_check,
    coherence_f,
    exact_delta2,
    mutual_coherence,
    normalize_columns,
    qomp,
    residual_decay_report,
    theoretical_alpha,
    welch_lower_bound,
)
from qpursuit.sampling import gaussian_matrix, generator, sparse_signal


def test_coherence_f_hand_values():
    assert coherence_f(32) == pytest.approx(math.sqrt(32) / math.log(32), rel=1e-12)
    assert coherence_f(2) == pytest.approx(math.sqrt(2) / math.log(2), rel=1e-12)
    with pytest.raises(ValueError):
        coherence_f(1)


def test_welch_bound_hand_arithmetic():
    assert welch_lower_bound(32, 128) == pytest.approx(math.sqrt(96 / 4064), rel=1e-12)
    assert welch_lower_bound(32, 64) == pytest.approx(math.sqrt(1 / 63), rel=1e-12)
    assert welch_lower_bound(8, 8) == 0.0
    assert welch_lower_bound(8, 4) == 0.0
    with pytest.raises(ValueError):
        welch_lower_bound(0, 4)


def test_mutual_coherence_two_column_angle():
    theta = 0.3
    arr = np.array([[1.0, math.cos(theta)], [0.0, math.sin(theta)]])
    report = mutual_coherence(arr)
    assert report.mu == pytest.approx(math.cos(theta), rel=1e-12)
    assert report.argmax_pair == (0, 1)
    assert report.mu_times_f == pytest.approx(report.mu * coherence_f(2), rel=1e-12)


def test_mutual_coherence_identity_is_zero():
    report = mutual_coherence(np.eye(5))
    assert report.mu == 0.0
    assert report.welch_lower == 0.0


def test_mutual_coherence_matches_double_loop_oracle():
    rng = generator(701)
    for _ in range(20):
        arr = rng.standard_normal((8, 14))
        report = mutual_coherence(arr)
        # Oracle: explicit pairwise normalized inner products.
        best = (-1.0, None)
        for i in range(14):
            for j in range(i + 1, 14):
                g = abs(
                    arr[:, i]
                    @ arr[:, j]
                    / (np.linalg.norm(arr[:, i]) * np.linalg.norm(arr[:, j]))
                )
                if g > best[0] + 1e-15:
                    best = (g, (i, j))
        assert report.mu == pytest.approx(best[0], rel=1e-10)
        assert report.argmax_pair == best[1]


def test_mutual_coherence_respects_welch_bound():
    for seed in range(20):
        sm = gaussian_matrix(16, 48, seed)
        report = mutual_coherence(sm)
        assert report.mu >= report.welch_lower - 1e-12


def test_exact_delta2_matches_eigenvalue_oracle():
    rng = generator(709)
    nm = normalize_columns(rng.standard_normal((10, 16)))
    got = exact_delta2(nm)
    # Oracle: worst |eigenvalue - 1| of every pairwise Gram block.
    worst = 0.0
    for i in range(16):
        for j in range(i + 1, 16):
            g = float(nm.entries[:, i] @ nm.entries[:, j])
            eig = np.linalg.eigvalsh(np.array([[1.0, g], [g, 1.0]]))
            worst = max(worst, float(np.max(np.abs(eig - 1.0))))
    assert got == pytest.approx(worst, rel=1e-12)
    assert got == pytest.approx(mutual_coherence(nm).mu, rel=1e-12)


def test_exact_delta2_requires_normalized():
    with pytest.raises(ValueError):
        exact_delta2(np.eye(3) * 2.0)


def test_mean_coherence_near_reference_band():
    # Reference mean coherence of normalized 32 x 128 Gaussian matrices,
    # frozen from a 1000-seed Monte Carlo estimate: 0.634 +/- 0.05.
    mus = [mutual_coherence(gaussian_matrix(32, 128, 9000 + t)).mu for t in range(60)]
    assert abs(float(np.mean(mus)) - 0.634) <= 0.05


def test_decay_check_rows_and_reproducibility():
    rows = coherence_decay_check([8, 16], 4.0, 5, 42)
    again = coherence_decay_check([8, 16], 4.0, 5, 42)
    assert rows == again
    assert [row.m for row in rows] == [8, 16]
    assert rows[0].mean_mu > rows[1].mean_mu
    for row in rows:
        assert row.mean_mu_f == pytest.approx(row.mean_mu * coherence_f(row.m), rel=1e-12)
        assert 0.0 <= row.fraction_bounded <= 1.0


def test_decay_check_input_validation():
    with pytest.raises(ValueError):
        coherence_decay_check([4], 4.0, 5, 1)
    with pytest.raises(ValueError):
        coherence_decay_check([8], 4.0, 0, 1)


def test_theoretical_alpha_frozen_hand_value():
    # 1 - (0.8 * 0.85 * 90) / (4 * 32 * 121) with m=32, n=128, K=4.
    want = 1.0 - (0.8 * 0.85 * 90.0) / (4.0 * 32.0 * 121.0)
    assert want == pytest.approx(0.9960485537190083, abs=1e-15)
    got = theoretical_alpha(32, 128, 4, 0.2, 0.15)
    assert got == pytest.approx(want, abs=1e-12)


def test_theoretical_alpha_boundary_and_range():
    assert theoretical_alpha(32, 128, 4, 1.0, 0.3) == 1.0
    assert theoretical_alpha(32, 128, 4, 0.3, 1.0) == 1.0
    for K in (1, 4, 16):
        val = theoretical_alpha(32, 128, K, 0.0, 0.0)
        assert 0.0 < val < 1.0


def test_theoretical_alpha_simplifies_at_minimal_aspect():
    # n = 2m, K = 1, delta2 = mu = 0 reduces to 1 - 1/(4(2m-1)).
    for m in (8, 32, 100):
        got = theoretical_alpha(m, 2 * m, 1, 0.0, 0.0)
        assert got == pytest.approx(1.0 - 1.0 / (4.0 * (2 * m - 1)), rel=1e-14)


def test_theoretical_alpha_increases_with_k():
    vals = [theoretical_alpha(32, 128, K, 0.1, 0.2) for K in range(1, 17)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_theoretical_alpha_preconditions():
    with pytest.raises(PreconditionViolated):
        theoretical_alpha(32, 63, 4, 0.1, 0.1)
    with pytest.raises(PreconditionViolated):
        theoretical_alpha(32, 128, 0, 0.1, 0.1)
    with pytest.raises(PreconditionViolated):
        theoretical_alpha(32, 128, 17, 0.1, 0.1)
    with pytest.raises(PreconditionViolated):
        theoretical_alpha(32, 128, 4, 1.2, 0.1)
    with pytest.raises(PreconditionViolated):
        theoretical_alpha(32, 128, 4, 0.1, -0.2)


def test_residual_decay_report_constant_ratio():
    sm = gaussian_matrix(16, 32, 801)
    fake = SimpleNamespace(residual_history=np.array([1.0, 0.5, 0.25]))
    report = residual_decay_report(fake, sm, 2)
    assert report.empirical_alpha == pytest.approx(0.25, rel=1e-12)
    assert 0.0 < report.theoretical_alpha < 1.0
    assert report.K == 2
    assert report.mu == pytest.approx(mutual_coherence(sm).mu, rel=1e-12)


def test_residual_decay_report_skips_converged_steps():
    sm = gaussian_matrix(16, 32, 803)
    fake = SimpleNamespace(residual_history=np.array([1e-11, 1e-12]))
    report = residual_decay_report(fake, sm, 1)
    assert report.empirical_alpha == 0.0
    with pytest.raises(ValueError):
        residual_decay_report(SimpleNamespace(residual_history=np.array([1.0])), sm, 1)


def test_residual_decay_report_on_real_runs():
    rng = generator(809)
    for _ in range(10):
        sm = gaussian_matrix(16, 32, int(rng.integers(1 << 30)))
        truth = sparse_signal(32, 3, int(rng.integers(1 << 30)))
        b = sm.entries @ truth.to_dense()
        result = qomp(sm, b, StoppingRule(3))
        if result.iterations_run == 0:
            continue
        report = residual_decay_report(result, sm, max(1, result.iterations_run))
        assert report.empirical_alpha <= 1.0 + 1e-10
        assert 0.0 < report.theoretical_alpha <= 1.0
