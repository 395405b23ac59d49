import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glottal_emotion.errors import DegenerateInputError, ParameterError
from glottal_emotion.svm import (
    SvmConfig, SvmModel, dual_objective, kkt_violations, poly_kernel, svm_predict, svm_train,
)

cvxopt = pytest.importorskip("cvxopt")
cvxopt.solvers.options["show_progress"] = False
cvxopt.solvers.options["abstol"] = 1e-10
cvxopt.solvers.options["reltol"] = 1e-10
cvxopt.solvers.options["feastol"] = 1e-10


def qp_oracle(x, y, c, degree=1, coef0=0.0):
    """Dual optimum from a general-purpose interior-point QP solver."""
    n = len(y)
    k = poly_kernel(x, x, degree, coef0)
    P = cvxopt.matrix(np.outer(y, y) * k)
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.concatenate([np.zeros(n), np.full(n, c)]))
    A = cvxopt.matrix(np.asarray(y, float)[None, :])
    sol = cvxopt.solvers.qp(P, q, G, h, A, cvxopt.matrix(0.0))
    return -sol["primal objective"], np.ravel(sol["x"])


def random_set(rng, n=12, d=3, shift=0.8):
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x = rng.standard_normal((n, d)) + shift * y[:, None]
    return x, y


class TestSeparable:
    def test_ten_points(self):
        x = np.array([[0, 0], [1, 0], [0, 1], [0.5, 0.2], [0.2, 0.6],
                      [3, 3], [4, 3], [3, 4], [3.5, 3.8], [4.2, 4.1]], float)
        y = [-1] * 5 + [1] * 5
        m = svm_train(x, y, SvmConfig(c=100))
        assert m.predict(x) == y
        d = m.decision_function(x) * np.array(y)
        assert d.min() == pytest.approx(1.0, abs=1e-3)

    def test_xor_degree2(self):
        x = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], float)
        y = [1, 1, -1, -1]
        m = svm_train(x, y, SvmConfig(c=1.0, degree=2, coef0=1.0))
        assert m.predict(x) == y
        np.testing.assert_allclose(m.alphas, 0.125, atol=1e-4)

    def test_xor_linear_fails(self):
        x = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], float)
        m = svm_train(x, [1, 1, -1, -1], SvmConfig(c=1.0))
        assert m.predict(x) != [1, 1, -1, -1]


class TestQpOracle:
    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize("degree, coef0, c", [(1, 0.0, 1.0), (2, 1.0, 0.5), (3, 1.0, 5.0)])
    def test_dual_objective(self, seed, degree, coef0, c):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 13))
        x, y = random_set(rng, n)
        x = x / np.abs(x).max()
        m = svm_train(x, y, SvmConfig(c=c, degree=degree, coef0=coef0, tol=1e-6, max_passes=2000))
        want, _ = qp_oracle(x, y, c, degree, coef0)
        assert m.converged
        assert m.dual_objective == pytest.approx(want, abs=1e-4)
        k = poly_kernel(x, x, degree, coef0)
        assert dual_objective(m.alphas, y, k) == pytest.approx(m.dual_objective)


class TestInvariants:
    @settings(max_examples=30)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 20.0), st.integers(1, 3))
    def test_box_equality_and_kkt(self, seed, c, degree):
        rng = np.random.default_rng(seed)
        x, y = random_set(rng, int(rng.integers(4, 30)), shift=float(rng.uniform(0, 1.5)))
        x = x / np.abs(x).max()
        m = svm_train(x, y, SvmConfig(c=c, degree=degree, coef0=1.0))
        a = m.alphas
        assert np.all(a >= 0) and np.all(a <= c)
        assert abs(np.dot(a, y)) <= 1e-8
        if m.converged:
            assert m.kkt_residual <= 1e-3
            k = poly_kernel(x, x, degree, 1.0)
            grad = (np.outer(y, y) * k) @ a - 1.0
            assert np.max(kkt_violations(a, y, grad, m.bias, c)) <= 1e-3 + 1e-9

    @settings(max_examples=20)
    @given(st.integers(0, 2**31 - 1))
    def test_label_swap_antisymmetric(self, seed):
        rng = np.random.default_rng(seed)
        x, y = random_set(rng, 16)
        m1 = svm_train(x, y)
        m2 = svm_train(x, -y)
        probe = rng.standard_normal((10, x.shape[1]))
        np.testing.assert_allclose(m1.decision_function(probe), -m2.decision_function(probe), atol=1e-9)

    def test_duplicating_every_row_at_half_c(self, rng):
        # duplicated rows at C/2 pose the same dual as the original at C
        x, y = random_set(rng, 12)
        m = svm_train(x, y, SvmConfig(c=1.0, tol=1e-6, max_passes=2000))
        m2 = svm_train(np.vstack([x, x]), np.concatenate([y, y]), SvmConfig(c=0.5, tol=1e-6, max_passes=2000))
        probe = rng.standard_normal((50, 3))
        np.testing.assert_allclose(m2.decision_function(probe), m.decision_function(probe), atol=1e-3)
        assert m2.dual_objective == pytest.approx(m.dual_objective, abs=1e-5)

    def test_duplicating_non_support_pair(self, rng):
        x, y = random_set(rng, 20, shift=1.5)
        m = svm_train(x, y, SvmConfig(tol=1e-6, max_passes=2000))
        free_neg = np.flatnonzero((m.alphas == 0) & (y < 0))
        free_pos = np.flatnonzero((m.alphas == 0) & (y > 0))
        assert free_neg.size and free_pos.size
        extra = [free_neg[0], free_pos[0]]
        m2 = svm_train(np.vstack([x, x[extra]]), np.concatenate([y, y[extra]]), SvmConfig(tol=1e-6, max_passes=2000))
        probe = rng.standard_normal((50, 3))
        np.testing.assert_allclose(m2.decision_function(probe), m.decision_function(probe), atol=1e-3)
        assert m2.predict(probe) == m.predict(probe)

    def test_determinism(self, rng):
        x, y = random_set(rng, 20)
        a, b = svm_train(x, y), svm_train(x, y)
        np.testing.assert_array_equal(a.alphas, b.alphas)
        assert a.bias == b.bias


class TestApi:
    def test_string_labels(self, rng):
        x, y = random_set(rng, 12, shift=3)
        labels = np.where(y > 0, "R", "L")
        m = svm_train(x, labels)
        assert m.labels == ("L", "R")
        assert m.predict(x) == labels.tolist()
        assert svm_predict(m, x[0]) == labels[0]

    def test_single_class(self):
        with pytest.raises(DegenerateInputError) as e:
            svm_train(np.zeros((3, 2)), [1, 1, 1])
        assert e.value.code == "single_class"

    def test_dimension_mismatch(self, rng):
        x, y = random_set(rng)
        m = svm_train(x, y)
        with pytest.raises(ParameterError):
            m.decision_function(np.zeros((1, 5)))
        with pytest.raises(ParameterError):
            svm_predict(m, np.zeros((2, 3)))

    @pytest.mark.parametrize("kw", [{"c": 0}, {"degree": 0}, {"degree": 1.5}, {"tol": 0}, {"max_passes": 0}])
    def test_bad_config(self, kw):
        with pytest.raises(ParameterError):
            SvmConfig(**kw)

    def test_text_round_trip(self, rng):
        x, y = random_set(rng, 14)
        m = svm_train(x, y, SvmConfig(degree=2, coef0=1.0))
        back = SvmModel.from_text(m.to_text())
        probe = rng.standard_normal((7, 3))
        np.testing.assert_array_equal(back.decision_function(probe), m.decision_function(probe))
        assert back.to_text() == m.to_text()

    def test_malformed_text(self):
        with pytest.raises(ParameterError):
            SvmModel.from_text("[params]\nbias,1\n")

    def test_non_convergence_flagged(self, rng):
        x, y = random_set(rng, 40, shift=0.0)
        m = svm_train(x, y, SvmConfig(c=100.0, degree=3, coef0=1.0, tol=1e-9, max_passes=1))
        assert not m.converged
        assert m.n_iter == 40
