import numpy as np
import pytest

from gpqed import gp, kernels
from gpqed.errors import DataError, InputError
from gpqed.gp import Dataset, fit, log_marginal_likelihood, predict
from gpqed.kernels import from_name

from conftest import (
    oracle_log_marginal_likelihood,
    oracle_predict,
    random_instance,
)


class TestDataset:
    def test_shapes(self):
        d = Dataset(np.arange(4.0), np.arange(4.0))
        assert d.n == 4 and d.p == 1

    def test_rejects_nonfinite(self):
        with pytest.raises(DataError):
            Dataset(np.array([0.0, np.nan]), np.array([1.0, 2.0]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((3, 1)), np.zeros(2))


class TestFit:
    def test_single_point_cholesky(self):
        se = from_name("se", variance=2.0)
        f = fit(Dataset([0.5], [1.0]), se, noise_variance=0.3)
        assert f.chol[0, 0] == pytest.approx(np.sqrt(2.0 + 0.3))

    def test_reconstruction(self, rng):
        data, kern, noise = random_instance(rng, n=5)
        f = fit(data, kern, noise)
        K = kernels.gram(kern, data.X) + noise * np.eye(5)
        np.testing.assert_allclose(f.chol @ f.chol.T, K, rtol=1e-8)

    def test_constant_y_zero_alpha(self):
        d = Dataset(np.linspace(0, 1, 6), np.full(6, 3.5))
        f = fit(d, from_name("se"), 0.1)
        assert f.mean_constant == pytest.approx(3.5)
        np.testing.assert_allclose(f.alpha, 0.0, atol=1e-12)

    def test_rejects_nonpositive_noise(self):
        with pytest.raises(InputError):
            fit(Dataset([0.0], [0.0]), from_name("se"), 0.0)


class TestLogMarginalLikelihood:
    def test_scalar_case(self):
        # n=1, residual zero, k(x,x)=1, noise 1: -log(2)/2 - log(2*pi)/2
        f = fit(Dataset([0.0], [2.0]), from_name("se"), 1.0)
        expected = -0.5 * np.log(2.0) - 0.5 * np.log(2.0 * np.pi)
        assert log_marginal_likelihood(f) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-1.26551, abs=1e-5)

    def test_matches_dense_oracle(self, rng):
        for _ in range(25):
            data, kern, noise = random_instance(rng)
            f = fit(data, kern, noise)
            want = oracle_log_marginal_likelihood(data, kern, noise,
                                                  f.mean_constant)
            assert log_marginal_likelihood(f) == pytest.approx(want, rel=1e-8)

    def test_large_noise_iid_limit(self, rng):
        data, kern, _ = random_instance(rng, n=6)
        c = float(np.mean(data.y))
        resid = data.y - c
        prev_gap = None
        for noise in [1e2, 1e4, 1e6]:
            f = fit(data, kern, noise)
            iid = float(np.sum(
                -0.5 * resid ** 2 / noise - 0.5 * np.log(2 * np.pi * noise)))
            gap = abs(log_marginal_likelihood(f) - iid)
            if prev_gap is not None:
                assert gap < prev_gap
            prev_gap = gap
        assert prev_gap < 1e-4

    def test_invariant_to_point_ordering(self, rng):
        data, kern, noise = random_instance(rng, n=7)
        f = fit(data, kern, noise)
        perm = rng.permutation(7)
        f2 = fit(Dataset(data.X[perm], data.y[perm]), kern, noise)
        assert log_marginal_likelihood(f) == pytest.approx(
            log_marginal_likelihood(f2), abs=1e-12)


class TestPredict:
    def test_noiseless_interpolation(self):
        d = Dataset(np.array([-1.0, 0.0, 1.0]), np.array([0.5, -0.3, 0.9]))
        f = fit(d, from_name("se"), 1e-10)
        mean, var = predict(f, d.X)
        np.testing.assert_allclose(mean, d.y, atol=1e-4)
        assert np.all(var < 1e-4)

    def test_prior_reversion_far_away(self, rng):
        data, _, noise = random_instance(rng, n=5)
        kern = from_name("se", variance=1.7, lengthscale=0.5)
        f = fit(data, kern, noise)
        mean, var = predict(f, [[data.X.max() + 20 * 0.5]])
        assert mean[0] == pytest.approx(f.mean_constant, abs=1e-4)
        assert var[0] == pytest.approx(kern.variance, abs=1e-4)

    def test_matches_conditioning_oracle(self, rng):
        for _ in range(25):
            data, kern, noise = random_instance(rng, n=5)
            Xs = rng.uniform(-3, 3, size=(3, 1))
            f = fit(data, kern, noise)
            mean, var = predict(f, Xs)
            omean, ovar = oracle_predict(data, kern, noise, f.mean_constant, Xs)
            np.testing.assert_allclose(mean, omean, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(var, np.maximum(ovar, 0.0),
                                       rtol=1e-8, atol=1e-10)

    def test_dimension_mismatch(self, rng):
        data, kern, noise = random_instance(rng, n=4, p=2)
        f = fit(data, kern, noise)
        with pytest.raises(InputError):
            predict(f, np.zeros((2, 1)))

    def test_variance_never_negative(self, rng):
        for _ in range(20):
            data, kern, noise = random_instance(rng)
            _, var = predict(fit(data, kern, noise),
                             rng.uniform(-3, 3, size=(4, 1)))
            assert np.all(var >= 0.0)

    def test_observation_shrinks_variance(self, rng):
        for _ in range(20):
            data, kern, noise = random_instance(rng, n=6)
            Xs = rng.uniform(-3, 3, size=(3, 1))
            _, var_all = predict(fit(data, kern, noise), Xs)
            smaller = Dataset(data.X[:-1], data.y[:-1])
            _, var_sub = predict(fit(smaller, kern, noise,
                                     mean_constant=float(np.mean(data.y))), Xs)
            assert np.all(var_all <= var_sub + 1e-10)
