import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from motiongp.gp import (GPRegressor, KernelParams, MultiOutputGP, ard_kernel,
                         gp_from_record, gp_to_record)

PAPER_PARAMS = KernelParams(signal_variance=1.0, length_scales=1.0,
                            noise_variance=0.01)


def dense_oracle(X, y, params, x_star):
    """Posterior mean/variance via the explicit dense inverse."""
    gram = ard_kernel(X, X, params)
    inv = np.linalg.inv(gram + params.noise_variance * np.eye(len(X)))
    k_star = ard_kernel(np.atleast_2d(x_star), X, params)[0]
    mean = k_star @ inv @ y
    var = params.signal_variance - k_star @ inv @ k_star
    return mean, var


class TestKernel:
    def test_zero_distance_gives_signal_variance(self):
        x = np.array([0.3, -0.7, 1.1])
        assert ard_kernel(x, x, PAPER_PARAMS) == pytest.approx(1.0)
        big = KernelParams(signal_variance=4.5)
        assert ard_kernel(x, x, big) == pytest.approx(4.5)

    def test_unit_offset_closed_form(self):
        x = np.zeros(3)
        x2 = np.array([1.0, 0.0, 0.0])
        assert ard_kernel(x, x2, PAPER_PARAMS) == pytest.approx(
            np.exp(-0.5), abs=1e-12)

    def test_flat_limit_for_huge_length_scales(self):
        params = KernelParams(length_scales=1e12)
        rng = np.random.default_rng(0)
        x, x2 = rng.normal(0, 1, 5), rng.normal(0, 1, 5)
        assert ard_kernel(x, x2, params) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape error"):
            ard_kernel(np.zeros(3), np.zeros(4), PAPER_PARAMS)

    def test_per_dimension_scales(self):
        params = KernelParams(length_scales=(1.0, 10.0))
        val = ard_kernel(np.zeros(2), np.array([1.0, 1.0]), params)
        assert val == pytest.approx(np.exp(-0.5 * (1.0 + 0.01)))

    def test_symmetry_and_positive_semidefiniteness(self):
        rng = np.random.default_rng(3)
        X = rng.normal(0, 1, (40, 6))
        gram = ard_kernel(X, X, PAPER_PARAMS)
        assert np.allclose(gram, gram.T, atol=1e-12)
        eigs = np.linalg.eigvalsh(gram)
        assert eigs.min() >= -1e-8

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            KernelParams(signal_variance=0.0)
        with pytest.raises(ValueError):
            KernelParams(length_scales=(1.0, -1.0))
        with pytest.raises(ValueError):
            KernelParams(noise_variance=-0.1)


class TestFitPredict:
    def test_single_point_posterior_mean(self):
        # Scalar evaluation of the posterior: k=1, gram+noise = 1.01.
        x = np.array([[0.5, 0.5]])
        for y0 in [1.0, -2.5]:
            gp = GPRegressor().fit(x, np.array([y0]))
            mean = gp.predict(x[0])
            assert mean == pytest.approx(y0 / 1.01, abs=1e-12)

    def test_single_point_posterior_variance(self):
        x = np.array([[0.5, 0.5]])
        gp = GPRegressor().fit(x, np.array([1.0]))
        _, var = gp.predict(x[0], return_var=True)
        assert var == pytest.approx(1.0 - 1.0 / 1.01, abs=1e-12)

    def test_zero_targets_give_zero_means(self):
        rng = np.random.default_rng(1)
        X = rng.normal(0, 1, (20, 4))
        gp = GPRegressor().fit(X, np.zeros(20))
        assert np.allclose(gp.alpha_, 0.0)
        assert np.allclose(gp.predict(rng.normal(0, 1, (5, 4))), 0.0)

    def test_far_field_reverts_to_prior(self):
        rng = np.random.default_rng(2)
        X = rng.normal(0, 1, (15, 3))
        y = rng.normal(0, 1, 15)
        gp = GPRegressor().fit(X, y)
        mean, var = gp.predict(np.full(3, 1e3), return_var=True)
        assert mean == pytest.approx(0.0, abs=1e-6)
        assert var == pytest.approx(1.0, abs=1e-6)

    def test_noise_free_interpolation(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(-1, 1, (6, 2))
        y = rng.normal(0, 1, 6)
        gp = GPRegressor(noise_variance=0.0).fit(X, y)
        mean, var = gp.predict(X, return_var=True)
        assert np.allclose(mean, y, atol=1e-8)
        assert np.all(var <= 1e-8)

    def test_factor_reconstructs_noisy_gram(self):
        rng = np.random.default_rng(4)
        X = rng.normal(0, 1, (30, 5))
        gp = GPRegressor().fit(X, rng.normal(0, 1, 30))
        noisy = ard_kernel(X, X, gp.params_) + 0.01 * np.eye(30)
        recon = gp.L_ @ gp.L_.T
        assert np.allclose(recon, noisy, rtol=1e-8, atol=1e-12)

    def test_jitter_retry_on_duplicate_inputs(self):
        X = np.tile([[0.5, -0.5]], (4, 1))
        y = np.array([1.0, 1.0, 1.0, 1.0])
        gp = GPRegressor(noise_variance=0.0).fit(X, y)
        assert np.isfinite(gp.alpha_).all()

    def test_hard_failure_names_the_noise_fix(self):
        X = np.tile([[0.5, -0.5]], (4, 1))
        with pytest.raises(np.linalg.LinAlgError,
                           match="increase noise variance"):
            GPRegressor(signal_variance=1e30,
                        noise_variance=0.0).fit(X, np.ones(4))

    def test_predict_before_fit(self):
        with pytest.raises(NotFittedError):
            GPRegressor().predict(np.zeros(3))

    def test_non_finite_inputs_rejected(self):
        gp = GPRegressor().fit(np.zeros((2, 2)), np.ones(2))
        with pytest.raises(ValueError, match="numeric error"):
            gp.predict(np.array([np.inf, 0.0]))

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="shape error"):
            GPRegressor().fit(np.zeros((3, 2)), np.zeros(4))
        gp = GPRegressor().fit(np.zeros((3, 2)), np.zeros(3))
        with pytest.raises(ValueError, match="shape error"):
            gp.predict(np.zeros(5))


class TestOracleEquivalence:
    def test_matches_dense_inverse_on_random_problems(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(2, 200))
            X = rng.uniform(-1, 1, (n, 60))
            y = rng.normal(0, 1, n)
            gp = GPRegressor().fit(X, y)
            x_star = rng.uniform(-1, 1, 60)
            mean, var = gp.predict(x_star, return_var=True)
            mean_o, var_o = dense_oracle(X, y, gp.params_, x_star)
            assert mean == pytest.approx(mean_o, abs=1e-8)
            assert var == pytest.approx(var_o, abs=1e-8)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(12)
        X = rng.uniform(-1, 1, (60, 8))
        y = rng.normal(0, 1, 60)
        x_star = rng.uniform(-1, 1, (4, 8))
        gp = GPRegressor().fit(X, y)
        mean, var = gp.predict(x_star, return_var=True)
        perm = rng.permutation(60)
        gp2 = GPRegressor().fit(X[perm], y[perm])
        mean2, var2 = gp2.predict(x_star, return_var=True)
        assert np.allclose(mean, mean2, atol=1e-10)
        assert np.allclose(var, var2, atol=1e-10)

    def test_variance_clamped_and_bounded(self):
        rng = np.random.default_rng(13)
        X = rng.uniform(-1, 1, (120, 6))
        gp = GPRegressor().fit(X, rng.normal(0, 1, 120))
        _, var = gp.predict(X, return_var=True)
        assert np.all(var >= 0.0)
        assert np.all(var <= 1.0 + 1e-10)


class TestMultiOutputGP:
    def test_zero_targets(self):
        rng = np.random.default_rng(21)
        X = rng.normal(0, 1, (10, 4))
        m = MultiOutputGP().fit(X, np.zeros((10, 3)))
        assert np.allclose(m.predict(X[0]), np.zeros(3))

    def test_training_point_within_noise_tolerance(self):
        rng = np.random.default_rng(22)
        X = rng.uniform(-1, 1, (25, 6))
        Y = rng.normal(0, 0.3, (25, 3))
        m = MultiOutputGP().fit(X, Y)
        mean = m.predict(X[7])
        oracle = np.array([dense_oracle(X, Y[:, j], m.estimators_[j].params_,
                                        X[7])[0] for j in range(3)])
        assert np.allclose(mean, oracle, atol=1e-8)
        assert np.all(np.abs(mean - Y[7]) <= 0.1 + 1e-9)

    def test_far_field_std_is_prior(self):
        rng = np.random.default_rng(23)
        X = rng.normal(0, 1, (12, 5))
        m = MultiOutputGP().fit(X, rng.normal(0, 1, (12, 3)))
        _, std = m.predict(np.full(5, 500.0), return_std=True)
        assert np.allclose(std, 1.0, atol=1e-6)

    def test_heads_share_training_inputs(self):
        rng = np.random.default_rng(24)
        X = rng.normal(0, 1, (9, 4))
        m = MultiOutputGP().fit(X, rng.normal(0, 1, (9, 3)))
        for gp in m.estimators_[1:]:
            assert np.array_equal(gp.X_, m.estimators_[0].X_)


class TestPersistence:
    def test_record_round_trip_reproduces_predictions(self):
        rng = np.random.default_rng(31)
        X = rng.uniform(-1, 1, (18, 6))
        Y = rng.normal(0, 0.2, (18, 3))
        m = MultiOutputGP(noise_variance=0.02).fit(X, Y)
        rec = gp_to_record(m)
        m2 = gp_from_record(rec)
        x_star = rng.uniform(-1, 1, (3, 6))
        mu1, s1 = m.predict(x_star, return_std=True)
        mu2, s2 = m2.predict(x_star, return_std=True)
        assert np.array_equal(mu1, mu2)
        assert np.array_equal(s1, s2)

    def test_version_field_is_checked(self):
        rng = np.random.default_rng(32)
        m = MultiOutputGP().fit(rng.normal(0, 1, (4, 2)),
                                rng.normal(0, 1, (4, 3)))
        rec = gp_to_record(m)
        rec["version"] = 99
        with pytest.raises(ValueError, match="incompatible"):
            gp_from_record(rec)
