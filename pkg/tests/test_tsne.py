import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdgpipe.errors import CalibrationFailedError, ShapeMismatchError
from sdgpipe.tsne import (
    P_FLOOR,
    Embedding,
    GradientSchedule,
    calibrate_sigma,
    joint_affinities,
    kl_divergence,
    kl_gradient,
    q_matrix,
    run,
)


def plain_row(sq_dists, sigma):
    """Conditional affinities from the textbook formula.

    Shifting by the minimum distance cancels in the quotient but keeps the
    exponentials representable at small sigma.
    """
    d = np.asarray(sq_dists, dtype=float)
    w = np.exp(-(d - d.min()) / (2.0 * sigma**2))
    return w / w.sum()


def plain_perplexity(sq_dists, sigma):
    p = plain_row(sq_dists, sigma)
    nz = p[p > 0]  # 0 * log2(0) -> 0 by convention
    h_bits = -np.sum(nz * np.log2(nz))
    return 2.0**h_bits


class TestCalibrateSigma:
    @given(st.integers(0, 2**32 - 1), st.floats(2.0, 15.0))
    @settings(max_examples=40)
    def test_meets_tolerance_by_independent_recomputation(self, seed, target):
        rng = np.random.default_rng(seed)
        d = rng.uniform(0.1, 20.0, size=20)
        sigma, p = calibrate_sigma(d, target)
        assert sigma > 0
        assert plain_perplexity(d, sigma) == pytest.approx(target, abs=1e-5)
        assert np.allclose(p, plain_row(d, sigma), atol=1e-12)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_uniform_distances_hit_uniform_row(self):
        d = np.full(9, 4.0)
        sigma, p = calibrate_sigma(d, 9.0)
        assert sigma > 0
        assert np.allclose(p, 1.0 / 9.0)

    def test_uniform_distances_other_target_fails(self):
        with pytest.raises(CalibrationFailedError):
            calibrate_sigma(np.full(9, 4.0), 5.0)

    def test_target_at_or_above_n_fails(self):
        d = np.random.default_rng(0).uniform(1, 5, size=10)
        with pytest.raises(CalibrationFailedError):
            calibrate_sigma(d, 10.0 + 1e-3)

    def test_target_below_one_fails(self):
        # perplexity = 2^entropy >= 1 for every bandwidth
        d = np.random.default_rng(1).uniform(1, 5, size=10)
        with pytest.raises(CalibrationFailedError):
            calibrate_sigma(d, 0.9)


class TestJointAffinities:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_invariants(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 20))
        X = rng.normal(size=(n, 3))
        aff = joint_affinities(X, perplexity=min(5.0, n - 2))
        P = aff.P
        assert P.shape == (n, n)
        assert np.array_equal(P, P.T)
        assert np.all(np.diag(P) == 0.0)
        off = ~np.eye(n, dtype=bool)
        assert np.all(P[off] >= P_FLOOR)
        assert abs(P.sum() - 1.0) <= 1e-9
        assert np.all(aff.sigmas > 0)

    def test_matches_direct_construction(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(6, 2))
        aff = joint_affinities(X, perplexity=3.0)
        n = X.shape[0]
        cond = np.zeros((n, n))
        for i in range(n):
            d = np.array([np.sum((X[i] - X[j]) ** 2) for j in range(n) if j != i])
            row = plain_row(d, aff.sigmas[i])
            cond[i, [j for j in range(n) if j != i]] = row
        expected = (cond + cond.T) / (2 * n)
        off = ~np.eye(n, dtype=bool)
        # the floor only lifts entries below 1e-12; here all are far above it
        assert np.allclose(aff.P[off], expected[off] / expected.sum(), atol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            joint_affinities(np.zeros((3, 2)), 2.0)


class TestQMatrix:
    def test_unit_square_hand_values(self):
        # corners of the unit square: 8 ordered side pairs at squared distance
        # 1 (kernel 1/2) and 4 diagonal pairs at 2 (kernel 1/3)
        Y = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        Q, kernel = q_matrix(Y)
        total = 8 * 0.5 + 4 * (1 / 3)
        assert kernel[0, 1] == pytest.approx(0.5)
        assert kernel[0, 2] == pytest.approx(1 / 3)
        assert Q[0, 1] == pytest.approx(0.5 / total)
        assert Q[0, 2] == pytest.approx((1 / 3) / total)
        assert Q.sum() == pytest.approx(1.0)
        assert np.all(np.diag(Q) == 0.0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_symmetric_normalized(self, seed):
        rng = np.random.default_rng(seed)
        Y = rng.normal(size=(int(rng.integers(2, 15)), 2))
        Q, _ = q_matrix(Y)
        assert np.array_equal(Q, Q.T)
        assert Q.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(Q >= 0)


class TestKlDivergence:
    def test_zero_when_equal(self):
        Y = np.random.default_rng(0).normal(size=(5, 2))
        Q, _ = q_matrix(Y)
        assert kl_divergence(Q, Q) == 0.0

    def test_three_point_hand_sum(self):
        P = np.array([
            [0.0, 0.2, 0.1],
            [0.2, 0.0, 0.15],
            [0.1, 0.15, 0.0],
        ])
        P = P / P.sum()
        Y = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
        Q, _ = q_matrix(Y)
        expected = 0.0
        for i in range(3):
            for j in range(3):
                if i != j:
                    expected += P[i, j] * math.log(P[i, j] / Q[i, j])
        assert kl_divergence(P, Q) == pytest.approx(expected, rel=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        Y1 = rng.normal(size=(8, 2))
        Y2 = rng.normal(size=(8, 2))
        P, _ = q_matrix(Y1)
        Q, _ = q_matrix(Y2)
        assert kl_divergence(P, Q) >= 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            kl_divergence(np.zeros((3, 3)), np.zeros((4, 4)))


def fd_gradient(P, Y, h=1e-6):
    grad = np.zeros_like(Y)
    for i in range(Y.shape[0]):
        for d in range(Y.shape[1]):
            up = Y.copy()
            up[i, d] += h
            down = Y.copy()
            down[i, d] -= h
            c_up = kl_divergence(P, q_matrix(up)[0])
            c_down = kl_divergence(P, q_matrix(down)[0])
            grad[i, d] = (c_up - c_down) / (2 * h)
    return grad


class TestGradient:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=15)
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(10, 4))
        P = joint_affinities(X, perplexity=4.0).P
        Y = rng.normal(size=(10, 2))
        analytic = kl_gradient(P, Y)
        numeric = fd_gradient(P, Y)
        rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        assert rel < 1e-4

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            kl_gradient(np.zeros((3, 3)), np.zeros((4, 2)))


def two_blobs(seed, n_per=20, dim=5, gap=12.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=0.3, size=(n_per, dim))
    b = rng.normal(scale=0.3, size=(n_per, dim))
    b[:, 0] += gap
    return np.vstack([a, b])


# default lr=200 is tuned for N in the low thousands; small maps need less
BLOB_SCHEDULE = GradientSchedule(learning_rate=20.0)


def blob_separated(Y, n_per):
    intra = max(
        np.linalg.norm(Y[i] - Y[j])
        for block in (range(n_per), range(n_per, 2 * n_per))
        for i in block
        for j in block
    )
    inter = min(
        np.linalg.norm(Y[i] - Y[j])
        for i in range(n_per)
        for j in range(n_per, 2 * n_per)
    )
    return intra < inter


class TestRun:
    def test_history_and_kl_decrease(self):
        X = two_blobs(0)
        sched = GradientSchedule(learning_rate=20.0, iterations=600)
        emb = run(X, perplexity=10.0, seed=0, schedule=sched)
        steps = [s for s, _ in emb.kl_history]
        assert steps == list(range(50, 650, 50))
        # KL against the plain P only settles after exaggeration lifts
        assert emb.final_kl < dict(emb.kl_history)[50]
        assert emb.Y.shape == (40, 2)
        assert isinstance(emb, Embedding)

    def test_blobs_separate(self):
        X = two_blobs(1)
        emb = run(X, perplexity=10.0, seed=1, schedule=BLOB_SCHEDULE)
        assert blob_separated(emb.Y, 20)

    def test_seed_reproducibility(self):
        X = two_blobs(2)
        sched = GradientSchedule(learning_rate=20.0, iterations=120)
        a = run(X, perplexity=10.0, seed=9, schedule=sched)
        b = run(X, perplexity=10.0, seed=9, schedule=sched)
        assert np.array_equal(a.Y, b.Y)
        assert a.kl_history == b.kl_history
        c = run(X, perplexity=10.0, seed=10, schedule=sched)
        assert not np.array_equal(a.Y, c.Y)

    def test_three_components(self):
        X = two_blobs(3)
        emb = run(X, perplexity=10.0, n_components=3, seed=0,
                  schedule=GradientSchedule(learning_rate=20.0, iterations=60))
        assert emb.Y.shape == (40, 3)

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            run(two_blobs(4), perplexity=10.0, n_components=4)

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            GradientSchedule(iterations=0).validate()
        with pytest.raises(ValueError):
            GradientSchedule(learning_rate=-1.0).validate()
        with pytest.raises(ValueError):
            GradientSchedule(exaggeration=0.5).validate()
