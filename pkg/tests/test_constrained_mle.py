import numpy as np
import pytest

from parcornet import constrained_mle
from parcornet.errors import DomainError, EstimationError
from parcornet.matrices import EdgeSet


def random_scatter(p, rng):
    a = rng.standard_normal((2 * p, p))
    s = a.T @ a / (2 * p)
    return 0.5 * (s + s.T)


def random_edges(p, rng, q=0.4):
    pairs = [(j, k) for j in range(p) for k in range(j + 1, p) if rng.random() < q]
    return EdgeSet.from_pairs(p, pairs)


class TestKKTIdentity:
    def test_inverse_matches_scatter_on_pattern(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            p = int(rng.integers(3, 10))
            s = random_scatter(p, rng)
            edges = random_edges(p, rng)
            res = constrained_mle.fit(s, edges)
            # independent check through the actual inverse
            w_direct = np.linalg.inv(res.psi.values)
            tol = 1e-6 * np.abs(s).max()
            for j, k in edges:
                assert abs(w_direct[j, k] - s[j, k]) <= tol
            assert np.abs(np.diag(w_direct) - np.diag(s)).max() <= tol

    def test_exact_zeros_off_pattern(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            p = int(rng.integers(4, 9))
            s = random_scatter(p, rng)
            edges = random_edges(p, rng, q=0.3)
            res = constrained_mle.fit(s, edges)
            adj = edges.to_adjacency()
            for j in range(p):
                for k in range(p):
                    if j != k and not adj[j, k]:
                        assert res.psi.values[j, k] == 0.0


class TestClosedFormOracles:
    def test_complete_pattern_is_plain_inverse(self):
        rng = np.random.default_rng(32)
        s = random_scatter(5, rng)
        res = constrained_mle.fit(s, EdgeSet.complete(5))
        assert np.abs(res.psi.values - np.linalg.inv(s)).max() < 1e-8

    def test_empty_pattern_is_diagonal_inverse(self):
        rng = np.random.default_rng(33)
        s = random_scatter(4, rng)
        res = constrained_mle.fit(s, EdgeSet.empty(4))
        want = np.diag(1.0 / np.diag(s))
        assert np.abs(res.psi.values - want).max() < 1e-12

    def test_chain_decomposable_formula(self):
        # For the decomposable chain 0-1-2 the MLE has a clique-sum closed form:
        # Psi = [inv S_{01}]_pad + [inv S_{12}]_pad - [inv S_{11}]_pad
        rng = np.random.default_rng(34)
        for _ in range(5):
            s = random_scatter(3, rng)
            edges = EdgeSet.from_pairs(3, [(0, 1), (1, 2)])
            res = constrained_mle.fit(s, edges)
            want = np.zeros((3, 3))
            want[np.ix_([0, 1], [0, 1])] += np.linalg.inv(s[np.ix_([0, 1], [0, 1])])
            want[np.ix_([1, 2], [1, 2])] += np.linalg.inv(s[np.ix_([1, 2], [1, 2])])
            want[1, 1] -= 1.0 / s[1, 1]
            assert np.abs(res.psi.values - want).max() < 1e-8


class TestSolverBehavior:
    def test_result_is_positive_definite(self):
        rng = np.random.default_rng(35)
        for _ in range(10):
            s = random_scatter(6, rng)
            res = constrained_mle.fit(s, random_edges(6, rng))
            assert np.linalg.eigvalsh(res.psi.values).min() > 0.0

    def test_warm_start_same_answer(self):
        rng = np.random.default_rng(36)
        s = random_scatter(7, rng)
        edges = random_edges(7, rng)
        cold = constrained_mle.fit(s, edges)
        warm = constrained_mle.fit(s, edges, w_init=cold.covariance)
        assert warm.sweeps <= cold.sweeps
        assert np.abs(cold.psi.values - warm.psi.values).max() < 1e-8

    def test_diagonal_of_working_covariance_matches_scatter(self):
        rng = np.random.default_rng(37)
        s = random_scatter(5, rng)
        res = constrained_mle.fit(s, random_edges(5, rng))
        assert np.array_equal(np.diag(res.covariance), np.diag(s))

    def test_kkt_residual_reported(self):
        rng = np.random.default_rng(38)
        s = random_scatter(5, rng)
        res = constrained_mle.fit(s, random_edges(5, rng))
        assert res.kkt_residual <= 1e-6 * np.abs(s).max()


class TestErrors:
    def test_nonpositive_diagonal_rejected(self):
        s = np.eye(3)
        s[1, 1] = 0.0
        with pytest.raises(DomainError):
            constrained_mle.fit(s, EdgeSet.empty(3))

    def test_p_mismatch(self):
        with pytest.raises(EstimationError):
            constrained_mle.fit(np.eye(3), EdgeSet.empty(4))

    def test_degenerate_scatter_with_full_pattern_fails(self):
        # rank-1 scatter cannot support a complete pattern
        v = np.arange(1.0, 5.0)
        s = np.outer(v, v)
        with pytest.raises(EstimationError):
            constrained_mle.fit(s, EdgeSet.complete(4))

    def test_sweep_cap_raises(self):
        rng = np.random.default_rng(39)
        s = random_scatter(8, rng)
        with pytest.raises(EstimationError, match="converge"):
            constrained_mle.fit(s, random_edges(8, rng, q=0.6), max_sweeps=0)
