import io
from itertools import permutations

import numpy as np
import pytest

from bmlab.errors import ResourceLimitError
from bmlab.gaussian import BrownianSnakeSample, sample_excursion, sample_snake_labels
from bmlab.paths import GridPath
from bmlab.rng import RngStream
from bmlab.snake_map import (DiscreteBrownianMap, d_circ, d_circ_matrix,
                             quotient_metric, resample_marked_points)


def _fixture_snake(y):
    y = np.asarray(y, dtype=float)
    n = len(y)
    x = np.concatenate([[0.0], np.full(n - 2, 1.0), [0.0]])
    xp = GridPath(np.linspace(0, 1, n), x, "excursion")
    return BrownianSnakeSample(xp, y - y[0], int(np.argmin(y)))


def _brute_force_chain_metric(seed):
    """Minimum over all chains of distinct intermediate points."""
    n = seed.shape[0]
    best = seed.copy()
    idx = list(range(n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            others = [k for k in idx if k not in (i, j)]
            for r in range(1, len(others) + 1):
                for mid in permutations(others, r):
                    chain = [i, *mid, j]
                    tot = sum(seed[a][b] for a, b in zip(chain[:-1], chain[1:]))
                    if tot < best[i][j]:
                        best[i][j] = tot
    return best


def test_d_circ_hand_fixture():
    # Y = [0, 1, 0.5, 2, 0]: pair (1,3) has inner arc min 0.5, wrap min 0
    snake = _fixture_snake([0.0, 1.0, 0.5, 2.0, 0.0])
    assert d_circ(snake, 1, 3) == pytest.approx(2.0, abs=1e-12)
    assert d_circ(snake, 3, 1) == pytest.approx(2.0, abs=1e-12)
    assert d_circ(snake, 2, 2) == 0.0
    with pytest.raises(ValueError):
        d_circ(snake, 0, 5)


def test_d_circ_matrix_matches_pointwise_and_label_bound():
    x = sample_excursion(40, 1.0, RngStream(1))
    snake = sample_snake_labels(x, RngStream(2))
    mat = d_circ_matrix(snake)
    for i in range(0, 40, 7):
        for j in range(0, 40, 5):
            assert mat[i, j] == pytest.approx(d_circ(snake, i, j), abs=1e-12)
    y = snake.y_values
    assert np.all(mat >= np.abs(y[:, None] - y[None, :]) - 1e-12)


def test_quotient_matches_brute_force_chains_n6():
    x = sample_excursion(6, 1.0, RngStream(3))
    snake = sample_snake_labels(x, RngStream(4))
    bm = quotient_metric(snake)
    brute = _brute_force_chain_metric(d_circ_matrix(snake))
    assert np.allclose(bm.dmat, brute, rtol=1e-12, atol=1e-12)


def _check_invariants(bm, snake):
    d = bm.dmat
    n = bm.n
    assert np.allclose(d, d.T, rtol=0, atol=0)
    assert np.all(np.diag(d) == 0.0)
    scale = max(float(d.max()), 1.0)
    # triangle inequality via one matrix pass
    viol = d[:, :, None] - (d[:, None, :] + d[None, :, :])
    assert viol.max() <= 1e-9 * scale
    seed = d_circ_matrix(snake)
    assert np.all(d <= seed + 1e-9 * scale)
    y = snake.y_values
    assert np.all(d >= np.abs(y[:, None] - y[None, :]) - 1e-9 * scale)
    root = bm.root_index
    assert np.allclose(d[root], y - y[root], rtol=1e-9, atol=1e-12 * scale)


def test_metric_invariants_midsize():
    x = sample_excursion(96, 1.0, RngStream(5))
    snake = sample_snake_labels(x, RngStream(6))
    bm = quotient_metric(snake)
    _check_invariants(bm, snake)
    assert bm.dual_root_index == 0
    assert bm.mass == pytest.approx(1.0 / 96)


def test_monotone_refinement_under_subsampling():
    # refining the grid deepens the observed arc minima, so seed distances
    # on common pairs grow; the quotient on common points never shrinks
    # (beyond roundoff), and chains restricted to the coarse subset stay
    # available (closing over fewer points can only give larger values)
    x = sample_excursion(129, 1.0, RngStream(7))
    fine = sample_snake_labels(x, RngStream(8))
    coarse = fine.subsample(2)
    bm_f = quotient_metric(fine)
    bm_c = quotient_metric(coarse)
    tol = 1e-9 * max(bm_c.dmat.max(), 1.0)
    assert np.all(d_circ_matrix(fine)[::2, ::2] >= d_circ_matrix(coarse) - tol)
    fine_on_coarse = bm_f.dmat[::2, ::2]
    assert np.all(fine_on_coarse >= bm_c.dmat - tol)
    # subset-chain closure of the fine seed dominates the full fine metric
    sub_seed = d_circ_matrix(fine)[::2, ::2]
    sub_closure = sub_seed.copy()
    for k in range(sub_closure.shape[0]):
        np.minimum(sub_closure,
                   sub_closure[:, k, None] + sub_closure[None, k, :],
                   out=sub_closure)
    assert np.all(fine_on_coarse <= sub_closure + tol)


def test_size_cap():
    x = sample_excursion(40, 1.0, RngStream(9))
    snake = sample_snake_labels(x, RngStream(10))
    with pytest.raises(ResourceLimitError):
        quotient_metric(snake, size_cap=16)


def test_identified_points_are_tagged_not_collapsed():
    # duplicate grid points at the same tree position have distance 0
    y = np.array([0.0, 1.0, 0.5, 0.5, 1.5, 0.0])
    snake = _fixture_snake(y)
    bm = quotient_metric(snake)
    assert bm.n == 6
    assert bm.dmat[2, 3] <= 1e-12
    assert bm.identified_pairs is not None
    assert [2, 3] in bm.identified_pairs.tolist()


def test_resample_marked_points_deterministic_and_uniform():
    x = sample_excursion(64, 1.0, RngStream(11))
    snake = sample_snake_labels(x, RngStream(12))
    bm = quotient_metric(snake)
    assert resample_marked_points(bm, RngStream(13)) == \
        resample_marked_points(bm, RngStream(13))
    from scipy.stats import chisquare
    draws = np.array([resample_marked_points(bm, RngStream(14).split(r))
                      for r in range(100_000)])
    for col in (0, 1):
        _, p = chisquare(np.bincount(draws[:, col], minlength=64))
        assert p > 1e-3
    # pairwise independence: empirical joint close to product of marginals
    joint = np.zeros((8, 8))
    for a, b in draws:
        joint[a % 8, b % 8] += 1
    joint /= len(draws)
    marg_a = joint.sum(axis=1)
    marg_b = joint.sum(axis=0)
    se = 4.0 / np.sqrt(len(draws))
    assert np.max(np.abs(joint - np.outer(marg_a, marg_b))) < se


def test_binary_dump_roundtrip():
    x = sample_excursion(32, 1.0, RngStream(15))
    snake = sample_snake_labels(x, RngStream(16))
    bm = quotient_metric(snake)
    bm.seed_info.update({"seed": 15, "grid_size": 32})
    buf = io.BytesIO()
    bm.dump_binary(buf)
    buf.seek(0)
    back = DiscreteBrownianMap.load_binary(buf)
    assert np.array_equal(back.dmat, bm.dmat)
    assert back.root_index == bm.root_index
    assert back.seed_info["grid_size"] == 32
