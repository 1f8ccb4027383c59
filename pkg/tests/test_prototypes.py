import math

import numpy as np
import pytest
from oracles import central_diff, max_pair_cos, rel_err

from hyperproto import kernels, prototypes
from hyperproto.errors import DomainError, RunError
from hyperproto.geometry import circle_prototypes, one_hot_prototypes
from hyperproto.prototypes import (EmbeddingSet, ProtoOptConfig, build_triplets,
                                   embedding_prototypes, optimize_prototypes, rank_loss,
                                   rank_loss_grad, separation_loss, separation_loss_grad,
                                   separation_stats)


def random_unit(K, D, rng):
    P = rng.standard_normal((K, D))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def tangent(G, P):
    return G - np.sum(G * P, axis=1, keepdims=True) * P


def random_embeddings(K, E, seed):
    rng = np.random.default_rng(seed)
    return EmbeddingSet([f"class{i}" for i in range(K)], rng.standard_normal((K, E)))


class TestSeparationLoss:
    def test_one_hot_is_zero(self):
        assert separation_loss(one_hot_prototypes(3)) == 0.0

    def test_identical_pair(self):
        p = np.array([0.6, 0.8])
        assert separation_loss(np.stack([p, p])) == pytest.approx(1.0, abs=1e-15)

    def test_antipodal_pair(self):
        assert separation_loss(np.array([[1.0, 0], [-1.0, 0]])) == -1.0

    def test_needs_two(self):
        with pytest.raises(DomainError):
            separation_loss(np.array([[1.0, 0.0]]))

    def test_rotation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            P = random_unit(8, 5, rng)
            Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
            assert separation_loss(P @ Q.T) == pytest.approx(separation_loss(P), abs=1e-9)


class TestSeparationGrad:
    def test_antipodal_tangent_zero(self):
        P = np.array([[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]])
        assert np.linalg.norm(tangent(separation_loss_grad(P), P)) < 1e-15

    def test_identical_pair_pulls_outward(self):
        p = np.array([0.6, 0.0, 0.8])
        P = np.stack([p, p])
        G = separation_loss_grad(P)
        np.testing.assert_allclose(G, P, atol=1e-15)
        fd = central_diff(separation_loss, P)
        np.testing.assert_allclose(G, fd, atol=1e-8)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        checked = 0
        while checked < 25:
            P = random_unit(5, 3, rng)
            M = P @ P.T - 2 * np.eye(5)
            top2 = np.sort(M, axis=1)[:, -2:]
            if np.min(top2[:, 1] - top2[:, 0]) < 1e-3:
                continue
            fd = central_diff(separation_loss, P)
            assert rel_err(separation_loss_grad(P), fd) < 1e-4
            checked += 1


class TestTriplets:
    def test_k3(self):
        assert build_triplets(3).tolist() == [[0, 1, 2], [1, 0, 2], [2, 0, 1]]

    def test_k5_size(self):
        T = build_triplets(5)
        assert len(T) == 30
        assert len({tuple(t) for t in T}) == 30
        assert all(len(set(t)) == 3 and t[1] < t[2] for t in T.tolist())

    def test_matches_enumeration(self):
        K = 7
        expected = [(i, j, k) for i in range(K) for j in range(K) for k in range(K)
                    if len({i, j, k}) == 3 and j < k]
        assert [tuple(t) for t in build_triplets(K).tolist()] == expected

    def test_subsample_deterministic(self):
        a = build_triplets(10, np.random.default_rng(9), 50)
        b = build_triplets(10, np.random.default_rng(9), 50)
        assert len(a) == 50
        np.testing.assert_array_equal(a, b)
        full = {tuple(t) for t in build_triplets(10).tolist()}
        assert {tuple(t) for t in a.tolist()} <= full
        assert len({tuple(t) for t in a.tolist()}) == 50

    def test_oversized_subsample_returns_full(self):
        np.testing.assert_array_equal(build_triplets(4, np.random.default_rng(0), 10_000),
                                      build_triplets(4))

    def test_needs_three(self):
        with pytest.raises(DomainError):
            build_triplets(2)


class TestRankLoss:
    def test_zero_margin_is_log2(self):
        P = np.eye(3)
        W = random_embeddings(3, 4, 0)
        assert rank_loss(P, W, build_triplets(3)) == pytest.approx(math.log(2), abs=1e-15)

    def test_hand_case(self):
        w = [(1.0, 0.0), (0.9, math.sqrt(1 - 0.81)), (0.1, -math.sqrt(1 - 0.01))]
        W = EmbeddingSet(["a", "b", "c"], w)
        p = [(1.0, 0.0, 0.0), (0.2, math.sqrt(1 - 0.04), 0.0), (0.6, 0.0, 0.8)]
        P = np.array(p)
        T = np.array([[0, 1, 2]])
        # prior says b is closer to a; prototypes say c: o = 0.2 - 0.6
        expected = -math.log(1.0 / (1.0 + math.exp(0.4)))
        assert rank_loss(P, W, T) == pytest.approx(expected, abs=1e-12)
        assert rank_loss(P, W, T) == pytest.approx(0.9130, abs=1e-4)

    def test_saturation_loss(self):
        # |cos - cos| <= 2 for real prototypes, so a margin of +10 is set
        # directly on the cosine matrix the kernel consumes
        losses = []
        for i, j, k in build_triplets(4):
            C = np.zeros((4, 4))
            C[i, j], C[i, k] = 5.0, -5.0
            loss, _ = kernels.rank_accumulate(C, np.array([[i, j, k]]), np.array([1.0]))
            losses.append(loss)
        assert np.mean(losses) < 5e-5

    def test_saturated_gradient_vanishes(self):
        for o, s in ((30.0, 1.0), (-30.0, 0.0)):
            C = np.zeros((3, 3))
            C[0, 1], C[0, 2] = o / 2, -o / 2
            _, A = kernels.rank_accumulate(C, np.array([[0, 1, 2]]), np.array([s]))
            assert np.linalg.norm(A) < 1e-8

    def test_non_negative(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            P = random_unit(6, 3, rng)
            W = EmbeddingSet(list("abcdef"), rng.standard_normal((6, 4)))
            assert rank_loss(P, W, build_triplets(6)) >= 0

    def test_k_mismatch(self):
        with pytest.raises(DomainError):
            rank_loss(np.eye(4), random_embeddings(3, 2, 0), build_triplets(3))

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        T = build_triplets(4)
        for _ in range(20):
            P = random_unit(4, 3, rng)
            W = EmbeddingSet(list("abcd"), rng.standard_normal((4, 5)))
            fd = central_diff(lambda X: rank_loss(X, W, T), P)
            assert rel_err(rank_loss_grad(P, W, T), fd) < 1e-4

    def test_grad_shape_is_prototypes_only(self):
        W = random_embeddings(4, 7, 0)
        G = rank_loss_grad(random_unit(4, 3, np.random.default_rng(0)), W, build_triplets(4))
        assert G.shape == (4, 3)


class TestOptimize:
    def test_k3_d2_reaches_circle_code(self):
        P, _ = optimize_prototypes(3, 2)
        assert max_pair_cos(P) <= -0.5 + 1e-2
        assert max_pair_cos(P) == pytest.approx(max_pair_cos(circle_prototypes(3)), abs=1e-2)

    def test_k4_d3_tetrahedron(self):
        for seed in range(10):
            P, _ = optimize_prototypes(4, 3, ProtoOptConfig(seed=seed))
            assert max_pair_cos(P) <= -1 / 3 + 2e-2

    def test_k2_antipodal_any_dim(self):
        for D in (1, 2, 5):
            P, _ = optimize_prototypes(2, D)
            assert P[0] @ P[1] == pytest.approx(-1.0, abs=1e-3)

    def test_unit_norm_every_epoch(self):
        for epochs in range(1, 21):
            P, losses = optimize_prototypes(6, 3, ProtoOptConfig(epochs=epochs, seed=4))
            assert len(losses) == epochs
            assert np.all(np.abs(np.linalg.norm(P, axis=1) - 1) < 1e-6)

    def test_bit_reproducible(self):
        c = ProtoOptConfig(epochs=200, seed=12)
        a, la = optimize_prototypes(9, 4, c)
        b, lb = optimize_prototypes(9, 4, c)
        np.testing.assert_array_equal(a, b)
        assert la == lb

    @pytest.mark.parametrize("seed", range(5))
    def test_loss_not_worse_than_initial(self, seed):
        P, losses = optimize_prototypes(12, 4, ProtoOptConfig(seed=seed))
        assert separation_loss(P) <= losses[0]

    def test_priors_keep_invariants(self):
        W = random_embeddings(8, 5, 2)
        c = ProtoOptConfig(epochs=300, seed=1)
        a, la = optimize_prototypes(8, 3, c, W)
        b, lb = optimize_prototypes(8, 3, c, W)
        np.testing.assert_array_equal(a, b)
        assert np.all(np.abs(np.linalg.norm(a, axis=1) - 1) < 1e-6)
        plain, lp = optimize_prototypes(8, 3, c)
        assert la[0] > lp[0]

    def test_priors_disabled_flag(self):
        W = random_embeddings(5, 3, 0)
        c = ProtoOptConfig(epochs=50, pi_enabled=False)
        np.testing.assert_array_equal(optimize_prototypes(5, 3, c, W)[0], optimize_prototypes(5, 3, c)[0])

    def test_triplet_subsampling_runs(self):
        W = random_embeddings(10, 4, 0)
        c = ProtoOptConfig(epochs=20, triplet_subsample=40, seed=3)
        a, _ = optimize_prototypes(10, 3, c, W)
        b, _ = optimize_prototypes(10, 3, c, W)
        np.testing.assert_array_equal(a, b)

    def test_large_k_default_subsample(self):
        W = random_embeddings(101, 4, 0)
        P, losses = optimize_prototypes(101, 5, ProtoOptConfig(epochs=2), W)
        assert P.shape == (101, 5) and len(losses) == 2

    def test_errors(self):
        with pytest.raises(DomainError):
            optimize_prototypes(1, 3)
        with pytest.raises(DomainError):
            optimize_prototypes(3, 1)
        with pytest.raises(DomainError):
            optimize_prototypes(4, 3, priors=random_embeddings(5, 2, 0))
        with pytest.raises(DomainError):
            ProtoOptConfig(epochs=0)
        with pytest.raises(DomainError):
            ProtoOptConfig(learning_rate=0)
        with pytest.raises(DomainError):
            ProtoOptConfig(pair_update="sideways")

    def test_non_finite_reports_epoch(self, monkeypatch):
        real = kernels.rowmax_scatter
        calls = []

        def poisoned(M, P, both):
            calls.append(1)
            total, G, J = real(M, P, both)
            return (np.nan if len(calls) == 4 else total), G, J

        monkeypatch.setattr(prototypes.kernels, "rowmax_scatter", poisoned)
        with pytest.raises(RunError) as info:
            optimize_prototypes(4, 3, ProtoOptConfig(epochs=10))
        assert info.value.epoch == 3

    def test_full_subgradient_merges_points_on_circle(self):
        # the reason "anchor" is the default: with the full subgradient two
        # prototypes on the circle can meet, and coincident rows never separate
        both, _ = optimize_prototypes(10, 2, ProtoOptConfig(pair_update="both"))
        anchor, _ = optimize_prototypes(10, 2)
        assert max_pair_cos(both) > 0.999
        assert max_pair_cos(anchor) < np.cos(np.pi / 5) + 1e-2


class TestEmbeddingPrototypes:
    def test_example(self):
        W = EmbeddingSet(["x", "y"], [(3.0, 4.0), (0.0, 2.0)])
        np.testing.assert_allclose(embedding_prototypes(W), [(0.6, 0.8), (0.0, 1.0)], atol=1e-15)

    def test_preserves_cosines(self):
        W = random_embeddings(6, 9, 4)
        P = embedding_prototypes(W)
        assert np.all(np.abs(np.linalg.norm(P, axis=1) - 1) < 1e-12)
        Wn = W.vectors / np.linalg.norm(W.vectors, axis=1, keepdims=True)
        np.testing.assert_allclose(P @ P.T, Wn @ Wn.T, atol=1e-12)

    def test_zero_vector_named(self):
        with pytest.raises(DomainError, match="'y'"):
            EmbeddingSet(["x", "y"], [(1.0, 0.0), (0.0, 0.0)])

    def test_duplicate_names(self):
        with pytest.raises(DomainError, match="duplicate"):
            EmbeddingSet(["x", "x"], [(1.0, 0.0), (0.0, 1.0)])


class TestStats:
    @pytest.mark.parametrize("K", [2, 5, 100])
    def test_one_hot(self, K):
        s = separation_stats(one_hot_prototypes(K))
        assert (s.min, s.mean, s.max) == (1.0, 1.0, 1.0)

    def test_antipodal(self):
        s = separation_stats(np.array([[1.0, 0.0], [-1.0, 0.0]]))
        assert (s.min, s.mean, s.max) == (2.0, 2.0, 2.0)

    def test_circle3(self):
        s = separation_stats(circle_prototypes(3))
        for v in (s.min, s.mean, s.max):
            assert v == pytest.approx(1.5, abs=1e-12)

    def test_ordering(self):
        s = separation_stats(random_unit(20, 4, np.random.default_rng(0)))
        assert 0 <= s.min <= s.mean <= s.max <= 2

    def test_line_format(self):
        assert separation_stats(one_hot_prototypes(4)).line() == "min=1.000000 mean=1.000000 max=1.000000"

    def test_needs_two(self):
        with pytest.raises(DomainError):
            separation_stats(np.array([[1.0, 0.0]]))
