"""Tests for the parallel pair-search engine."""

import itertools

import numpy as np
import pytest

from qpursuit import (
    ExclusionSet,
    NoAdmissiblePair,
    PairSearchConfig,
    Residual,
    evaluate_pair_block,
    normalize_columns,
    pair_residual_sq,
    select_best_pair,
    total_pair_count,
)
from qpursuit.sampling import gaussian_matrix, generator


def _exhaustive_best(sm, r, excluded=()):
    """Independent oracle: double loop over all pairs, no shared precompute."""
    An = sm.entries
    best = None
    for i, j in itertools.combinations(range(An.shape[1]), 2):
        if i in excluded or j in excluded:
            continue
        g = float(An[:, i] @ An[:, j])
        if 1.0 - g * g < 1e-10:
            continue
        val = pair_residual_sq(An[:, i], An[:, j], r.vector)
        if best is None or (val, i, j) < best:
            best = (val, i, j)
    return best


def test_total_pair_count():
    assert total_pair_count(5) == 10
    assert total_pair_count(2) == 1
    assert total_pair_count(1) == 0


def test_orthogonal_matrix_picks_two_largest_correlations():
    sm = normalize_columns(np.eye(6))
    r = Residual.from_vector(np.array([0.1, -3.0, 0.2, 2.0, 0.0, 0.5]))
    sel = select_best_pair(sm, r)
    assert (sel.i, sel.j) == (1, 3)
    assert sel.residual_sq == pytest.approx(r.norm_sq - 9.0 - 4.0, abs=1e-12)


def test_exact_tie_breaks_lexicographically():
    # Columns 0..2 live in the first two coordinates; column 3 is the third
    # axis. With r on the third axis every pair (i, 3) zeroes the residual
    # exactly, so the score ties at 0.0 and the smallest (i, j) must win.
    arr = np.zeros((3, 4))
    arr[0, 0] = 1.0
    arr[:2, 1] = [0.6, 0.8]
    arr[:2, 2] = [0.8, -0.6]
    arr[2, 3] = 1.0
    sm = normalize_columns(arr)
    r = Residual.from_vector(np.array([0.0, 0.0, 2.0]))
    sel = select_best_pair(sm, r)
    assert (sel.i, sel.j) == (0, 3)
    assert sel.residual_sq == 0.0


def test_matches_exhaustive_oracle_many_instances():
    rng = generator(211)
    for trial in range(200):
        m = int(rng.integers(4, 9))
        n = int(rng.integers(5, 17))
        sm = normalize_columns(rng.standard_normal((m, n)))
        r = Residual.from_vector(rng.standard_normal(m))
        want = _exhaustive_best(sm, r)
        sel = select_best_pair(sm, r)
        assert (sel.i, sel.j) == (want[1], want[2]), f"trial {trial}"
        assert sel.residual_sq == pytest.approx(want[0], rel=1e-9, abs=1e-12)


def test_respects_exclusions():
    rng = generator(223)
    sm = normalize_columns(rng.standard_normal((6, 10)))
    r = Residual.from_vector(rng.standard_normal(6))
    free = select_best_pair(sm, r)
    excl = ExclusionSet()
    excl.add(free.i)
    sel = select_best_pair(sm, r, excl)
    assert free.i not in (sel.i, sel.j)
    want = _exhaustive_best(sm, r, {free.i})
    assert (sel.i, sel.j) == (want[1], want[2])


def test_no_admissible_pair_when_too_few_free():
    sm = normalize_columns(np.eye(3))
    r = Residual.from_vector(np.array([1.0, 0.0, 0.0]))
    excl = ExclusionSet()
    excl.add(0)
    excl.add(2)
    with pytest.raises(NoAdmissiblePair):
        select_best_pair(sm, r, excl)


def test_no_admissible_pair_when_all_collinear():
    col = np.array([[0.6], [0.8]])
    sm = normalize_columns(np.hstack([col, col]))
    r = Residual.from_vector(np.array([1.0, 1.0]))
    with pytest.raises(NoAdmissiblePair):
        select_best_pair(sm, r)


def test_gram_cache_on_off_identical():
    rng = generator(227)
    sm = normalize_columns(rng.standard_normal((12, 30)))
    r = Residual.from_vector(rng.standard_normal(12))
    on = select_best_pair(sm, r, config=PairSearchConfig(gram_cache=True))
    off = select_best_pair(sm, r, config=PairSearchConfig(gram_cache=False))
    assert (on.i, on.j, on.residual_sq) == (off.i, off.j, off.residual_sq)


def test_chunk_size_does_not_change_result():
    rng = generator(229)
    sm = normalize_columns(rng.standard_normal((10, 40)))
    r = Residual.from_vector(rng.standard_normal(10))
    base = select_best_pair(sm, r)
    for chunk in (1, 3, 7, 64, 1000):
        sel = select_best_pair(sm, r, config=PairSearchConfig(chunk_size=chunk))
        assert (sel.i, sel.j, sel.residual_sq) == (base.i, base.j, base.residual_sq)


def test_bit_identical_across_thread_counts():
    rng = generator(233)
    for _ in range(20):
        sm = normalize_columns(rng.standard_normal((16, 64)))
        r = Residual.from_vector(rng.standard_normal(16))
        results = [
            select_best_pair(sm, r, config=PairSearchConfig(max_threads=t, chunk_size=5))
            for t in (1, 2, 8)
        ]
        for sel in results[1:]:
            assert (sel.i, sel.j) == (results[0].i, results[0].j)
            assert sel.residual_sq == results[0].residual_sq  # bitwise


def test_block_evaluation_singleton():
    rng = generator(239)
    sm = normalize_columns(rng.standard_normal((8, 12)))
    r = Residual.from_vector(rng.standard_normal(8))
    total = total_pair_count(12)
    pairs = list(itertools.combinations(range(12), 2))
    for k in (0, 1, total // 2, total - 1):
        block = evaluate_pair_block(sm, r, (k, k + 1))
        i, j = pairs[k]
        want = pair_residual_sq(sm.entries[:, i], sm.entries[:, j], r.vector)
        assert len(block) == 1
        assert block[0][:2] == (i, j)
        assert block[0][2] == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_block_evaluation_full_range_matches_oracle():
    rng = generator(241)
    sm = normalize_columns(rng.standard_normal((6, 9)))
    r = Residual.from_vector(rng.standard_normal(6))
    block = evaluate_pair_block(sm, r, (0, total_pair_count(9)))
    for k, (i, j) in enumerate(itertools.combinations(range(9), 2)):
        want = pair_residual_sq(sm.entries[:, i], sm.entries[:, j], r.vector)
        assert block[k][:2] == (i, j)
        assert block[k][2] == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_block_evaluation_halves_concatenate():
    rng = generator(251)
    sm = normalize_columns(rng.standard_normal((7, 11)))
    r = Residual.from_vector(rng.standard_normal(7))
    total = total_pair_count(11)
    whole = evaluate_pair_block(sm, r, (0, total))
    left = evaluate_pair_block(sm, r, (0, total // 2))
    right = evaluate_pair_block(sm, r, (total // 2, total))
    assert left + right == whole  # bitwise equal tuples


def test_block_evaluation_collinear_sentinel():
    col = np.array([[0.6], [0.8]])
    third = np.array([[1.0], [0.0]])
    sm = normalize_columns(np.hstack([col, col, third]))
    r = Residual.from_vector(np.array([1.0, -1.0]))
    block = evaluate_pair_block(sm, r, (0, 3))
    assert block[0][:2] == (0, 1) and block[0][2] == np.inf  # collinear pair
    assert np.isfinite(block[1][2]) and np.isfinite(block[2][2])


def test_block_evaluation_rejects_bad_range():
    sm = normalize_columns(np.eye(4))
    r = Residual.from_vector(np.ones(4))
    with pytest.raises(ValueError):
        evaluate_pair_block(sm, r, (3, 2))
    with pytest.raises(ValueError):
        evaluate_pair_block(sm, r, (0, total_pair_count(4) + 1))


def test_requires_normalized_columns():
    sm = normalize_columns(np.eye(3))
    scaled = type(sm).from_array(sm.entries * 2.0)
    r = Residual.from_vector(np.ones(3))
    with pytest.raises(ValueError):
        select_best_pair(scaled, r)


def test_exclusion_set_basics():
    excl = ExclusionSet()
    assert len(excl) == 0 and 3 not in excl
    excl.add(3)
    excl.add(3)
    assert len(excl) == 1 and 3 in excl
    mask = excl.mask(5)
    assert mask.tolist() == [False, False, False, True, False]
