"""Intercept estimators: exactness, oracles, identities, and error paths."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import make_sample
from boundary_intercept.data import Dataset
from boundary_intercept.errors import (
    EmptyWindowError,
    InsufficientSupportError,
    RankDeficiencyError,
)
from boundary_intercept.estimators import (
    _boundary_polyfit,
    disturbance_variance,
    local_constant,
    local_constant_transformed,
    local_linear,
    local_quadratic,
    smoothed_tail_mean,
    tail_mean,
)
from boundary_intercept.kernels import as_smoother, eval_kernel, kappa
from boundary_intercept.transform import laplace_cdf, loo_ecdf, normal_cdf


def simple_data(y, d, w_hat, z=None):
    y = np.asarray(y, dtype=float)
    return Dataset(y=y, d=np.asarray(d), x=np.asarray(w_hat, float)[:, None], z=z)


class TestTailMean:
    def test_strict_cutoff(self):
        data = simple_data([10.0, 20.0, 30.0], [1, 1, 1], [1.0, 2.0, 3.0])
        est = tail_mean(data, [], [1.0, 2.0, 3.0], gamma=2.0)
        assert est.mu == 30.0  # the w == gamma row is excluded
        assert est.effective_n == 1
        assert est.bandwidth == 2.0
        assert est.method == "tail_mean"

    def test_averages_selected_tail_only(self):
        w = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        data = simple_data([9.0, 1.0, 99.0, 3.0, 5.0], [1, 1, 0, 1, 1], w)
        est = tail_mean(data, [], w, gamma=0.5)
        assert est.mu == pytest.approx((1.0 + 3.0 + 5.0) / 3)
        assert est.effective_n == 3

    def test_subtracts_outcome_slope(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(50, 2))
        theta = np.array([0.5, -1.5])
        w = np.linspace(0, 1, 50)
        data = Dataset(y=4.0 + z @ theta, d=np.ones(50, dtype=int), x=w[:, None], z=z)
        est = tail_mean(data, theta, w, gamma=0.3)
        assert est.mu == pytest.approx(4.0, abs=1e-12)

    def test_empty_tail_raises(self):
        w = np.array([0.0, 1.0, 2.0])
        data = simple_data([1.0, 2.0, 3.0], [1, 1, 1], w)
        with pytest.raises(EmptyWindowError, match="gamma"):
            tail_mean(data, [], w, gamma=2.0)

    def test_censored_above_cutoff_not_used(self):
        w = np.array([0.0, 3.0])
        data = simple_data([1.0, 999.0], [1, 0], w)
        with pytest.raises(EmptyWindowError):
            tail_mean(data, [], w, gamma=2.0)


class TestSmoothedTailMean:
    def test_matches_manual_weighted_mean(self):
        w = np.array([0.2, 0.5, 0.9, 1.6, 2.4])
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        d = np.array([1, 1, 1, 1, 1])
        gamma = 0.4
        s = as_smoother(w - gamma)
        expected = np.dot(s, y) / s.sum()
        est = smoothed_tail_mean(simple_data(y, d, w), [], w, gamma=gamma)
        assert est.mu == pytest.approx(expected, rel=1e-14)
        assert est.effective_n == int((s > 0).sum())

    def test_weight_zero_at_and_below_cutoff(self):
        w = np.array([0.5, 1.0, 3.0])
        y = np.array([111.0, 222.0, 7.0])
        est = smoothed_tail_mean(simple_data(y, [1, 1, 1], w), [], w, gamma=1.0)
        assert est.mu == 7.0  # only w > gamma contributes; w == gamma has s = 0

    def test_wide_band(self):
        w = np.array([1.0, 2.0, 9.0])
        y = np.array([5.0, 6.0, 7.0])
        s = as_smoother(w - 0.5, b=4.0)
        est = smoothed_tail_mean(simple_data(y, [1, 1, 1], w), [], w, 0.5, b=4.0)
        assert est.mu == pytest.approx(np.dot(s, y) / s.sum(), rel=1e-14)

    def test_empty_raises(self):
        w = np.array([-1.0, 0.0])
        with pytest.raises(EmptyWindowError):
            smoothed_tail_mean(simple_data([1.0, 2.0], [1, 1], w), [], w, gamma=0.0)

    def test_invalid_band(self):
        w = np.array([0.0, 1.0])
        with pytest.raises(ValueError):
            smoothed_tail_mean(simple_data([1.0, 2.0], [1, 1], w), [], w, 0.0, b=-1.0)


class TestLocalConstant:
    def test_constant_residuals(self):
        data, theta, w_hat = make_sample(5, n=150, noise=0.0, mu=2.5)
        for kernel in ("gaussian", "epanechnikov"):
            est = local_constant(data, theta, w_hat, kernel, h=0.3)
            assert est.mu == pytest.approx(2.5, abs=1e-12)

    def test_single_point_window(self):
        # only one selected observation carries weight: estimate equals its residual
        w = np.array([0.1, 0.2, 0.3, 5.0])
        y = np.array([1.0, 2.0, 3.0, 42.0])
        data = simple_data(y, [0, 0, 1, 1], w)
        est = local_constant(data, [], w, "epanechnikov", h=0.2)
        # ranks: 0, 1/3, 2/3, 1; h = 0.2 keeps only rank 1 in the window
        assert est.mu == 42.0
        assert est.effective_n == 1

    def test_manual_two_point_mean(self):
        w = np.array([0.0, 1.0, 2.0])
        y = np.array([10.0, 20.0, 30.0])
        data = simple_data(y, [1, 1, 1], w)
        # ranks 0, 1/2, 1 -> kernel args (1 - t)/h with h = 0.5: 2, 1, 0
        kw = eval_kernel("epanechnikov", np.array([2.0, 1.0, 0.0]))
        est = local_constant(data, [], w, "epanechnikov", h=0.5)
        expected = np.dot(kw, y) / kw.sum()
        assert est.mu == pytest.approx(expected, rel=1e-14)

    def test_empty_window_mentions_bandwidth(self):
        w = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        d = [1, 1, 0, 0, 0]  # selected rows sit at low ranks
        data = simple_data(np.ones(5), d, w)
        with pytest.raises(EmptyWindowError, match="h=0.1"):
            local_constant(data, [], w, "epanechnikov", h=0.1)

    def test_bandwidth_domain(self):
        data, theta, w_hat = make_sample(6, n=30)
        for h in (0.0, -0.2, 0.51, np.nan):
            with pytest.raises(ValueError, match="bandwidth"):
                local_constant(data, theta, w_hat, "gaussian", h)
        local_constant(data, theta, w_hat, "gaussian", 0.5)  # boundary is legal

    def test_transformed_index_validation(self):
        data, theta, _ = make_sample(7, n=20)
        bad = np.full(20, 1.2)
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            local_constant_transformed(data, theta, bad, "gaussian", 0.3)

    def test_boundary_slope_bias_constant(self):
        # Residuals linear in the transformed index: the kernel-weighted mean
        # sits at -slope * h * kappa_1 / kappa_0 up to grid error.
        n = 200_001
        t = np.arange(n) / (n - 1)
        slope = 2.0
        y = slope * (t - 1.0)
        data = simple_data(y, np.ones(n, dtype=int), t)
        for kernel, h in (("epanechnikov", 0.05), ("poly7", 0.08)):
            est = local_constant(data, [], t, kernel, h)
            expected = -slope * h * kappa(kernel, 1) / kappa(kernel, 0)
            assert est.mu == pytest.approx(expected, rel=1e-3)


class TestTailKernelIdentities:
    """The tail means are kernel estimators under specific transforms.

    With the indicator kernel on [0, 1], an exact-CDF transform and
    h = 1 - F(gamma), the kernel-weighted mean reproduces ``tail_mean``;
    with the standard Laplace transform, the ramp kernel s(-log u) and
    h = exp(-gamma)/2, it reproduces ``smoothed_tail_mean`` with unit band.
    """

    N_FIXTURES = 100

    @staticmethod
    def indicator_kernel(t):
        t = np.asarray(t, dtype=float)
        return ((t >= 0.0) & (t <= 1.0)).astype(float)

    @staticmethod
    def ramp_kernel(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        with np.errstate(divide="ignore"):
            v = -np.log(u[pos])
        out[pos] = as_smoother(np.minimum(v, 2.0))  # s saturates at 1 past the band
        out[u == 0] = 1.0
        return out

    def fixtures(self):
        for seed in range(self.N_FIXTURES):
            data, theta, w_hat = make_sample(1000 + seed, n=200)
            rng = np.random.default_rng(5000 + seed)
            gamma = rng.uniform(0.05, 1.2)
            yield data, theta, w_hat, gamma

    def test_indicator_kernel_reproduces_tail_mean(self):
        worst = 0.0
        for data, theta, w_hat, gamma in self.fixtures():
            h = float(1.0 - normal_cdf(gamma))
            t = normal_cdf(w_hat)
            lhs = local_constant_transformed(data, theta, t, self.indicator_kernel, h)
            rhs = tail_mean(data, theta, w_hat, gamma)
            assert lhs.effective_n == rhs.effective_n
            worst = max(worst, abs(lhs.mu - rhs.mu))
        assert worst <= 1e-12

    def test_ramp_kernel_reproduces_smoothed_tail_mean(self):
        worst = 0.0
        for data, theta, w_hat, gamma in self.fixtures():
            h = 0.5 * float(np.exp(-gamma))
            t = laplace_cdf(w_hat)
            lhs = local_constant_transformed(data, theta, t, self.ramp_kernel, h)
            rhs = smoothed_tail_mean(data, theta, w_hat, gamma, b=1.0)
            assert lhs.effective_n == rhs.effective_n
            worst = max(worst, abs(lhs.mu - rhs.mu))
        assert worst <= 1e-12


class TestLocalLinear:
    def test_exact_on_linear_function(self):
        rng = np.random.default_rng(21)
        w_hat = rng.normal(size=120)
        t = loo_ecdf(w_hat)
        a, b = 1.5, -3.0
        y = a + b * (t - 1.0)
        data = simple_data(y, np.ones(120, dtype=int), w_hat)
        for kernel in ("gaussian", "epanechnikov", "poly7", "polyweight7"):
            est = local_linear(data, [], w_hat, kernel, h=0.4)
            assert est.mu == pytest.approx(a, abs=1e-10)
            assert est.g1 == pytest.approx(b, abs=1e-9)
            assert est.method == "local_linear"

    def test_matches_sqrt_weighted_lstsq(self):
        data, theta, w_hat = make_sample(31, n=300)
        t = loo_ecdf(w_hat)
        for kernel, h in (("epanechnikov", 0.35), ("gaussian", 0.15)):
            est = local_linear(data, theta, w_hat, kernel, h)
            kw = eval_kernel(kernel, (1.0 - t) / h)
            mask = (data.d == 1) & (kw > 0)
            u = t[mask] - 1.0
            design = np.column_stack([np.ones(u.size), u])
            sw = np.sqrt(kw[mask])
            resid = data.y[mask] - data.z[mask] @ theta
            coef, *_ = np.linalg.lstsq(design * sw[:, None], resid * sw, rcond=None)
            assert est.mu == pytest.approx(coef[0], abs=1e-9)
            assert est.g1 == pytest.approx(coef[1], abs=1e-9)

    def test_matches_nelder_mead_oracle(self):
        data, theta, w_hat = make_sample(32, n=150)
        t = loo_ecdf(w_hat)
        h = 0.4
        kw = eval_kernel("epanechnikov", (1.0 - t) / h)
        mask = (data.d == 1) & (kw > 0)
        u, w = t[mask] - 1.0, kw[mask]
        resid = data.y[mask] - data.z[mask] @ theta

        def sse(params):
            return np.sum(w * (resid - params[0] - params[1] * u) ** 2)

        res = minimize(
            sse,
            x0=np.array([resid.mean(), 0.0]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 10_000},
        )
        est = local_linear(data, theta, w_hat, "epanechnikov", h)
        assert est.mu == pytest.approx(res.x[0], abs=1e-4)
        assert est.g1 == pytest.approx(res.x[1], abs=1e-4)

    def test_coincident_abscissae_raise_rank_error(self):
        w_hat = np.array([3.0, 3.0, 3.0, 3.0, 0.0, 1.0])
        d = np.array([1, 1, 1, 1, 0, 0])
        data = simple_data(np.arange(6, dtype=float), d, w_hat)
        # the four selected rows are tied, hence share one rank value
        with pytest.raises(RankDeficiencyError, match="condition"):
            local_linear(data, [], w_hat, "epanechnikov", h=0.3)

    def test_insufficient_support(self):
        w_hat = np.array([0.5, 1.0, 2.0, 3.0])
        d = np.array([0, 0, 1, 1])
        data = simple_data(np.ones(4), d, w_hat)
        with pytest.raises(InsufficientSupportError, match="at least 3"):
            local_linear(data, [], w_hat, "gaussian", h=0.5)

    def test_curvature_bias_constant(self):
        # Residuals quadratic in the transformed index: the local linear fit
        # sits at -(k1 k3 - k2^2) / (2 (k0 k2 - k1^2)) * curvature * h^2.
        n = 20001
        t = np.arange(n) / (n - 1)
        curv = 3.0
        y = 0.5 * curv * (t - 1.0) ** 2
        data = simple_data(y, np.ones(n, dtype=int), t)
        for kernel, h in (("epanechnikov", 0.06), ("gaussian", 0.03)):
            k0, k1, k2, k3 = (kappa(kernel, r) for r in range(4))
            expected = -(k1 * k3 - k2 * k2) / (2 * (k0 * k2 - k1 * k1)) * curv * h * h
            est = local_linear(data, [], t, kernel, h)
            assert est.mu == pytest.approx(expected, rel=5e-3)


class TestLocalQuadratic:
    def test_exact_on_quadratic_function(self):
        rng = np.random.default_rng(41)
        w_hat = rng.normal(size=200)
        t = loo_ecdf(w_hat)
        a, b, c = 0.5, -2.0, 4.0
        u = t - 1.0
        y = a + b * u + 0.5 * c * u * u
        data = simple_data(y, np.ones(200, dtype=int), w_hat)
        est = local_quadratic(data, [], w_hat, "epanechnikov", h=0.45)
        assert est.mu == pytest.approx(a, abs=1e-8)
        assert est.g1 == pytest.approx(b, abs=1e-8)
        assert est.g1prime == pytest.approx(c, abs=1e-7)
        assert est.method == "local_quadratic"

    def test_constrained_curvature_equals_local_linear(self):
        data, theta, w_hat = make_sample(42, n=250)
        t = loo_ecdf(w_hat)
        h = 0.4
        kw = eval_kernel("polyweight7", (1.0 - t) / h)
        mask = (data.d == 1) & (kw > 0)
        resid = data.y[mask] - data.z[mask] @ theta
        coef = _boundary_polyfit(resid, t[mask] - 1.0, kw[mask], degree=1)
        est = local_linear(data, theta, w_hat, "polyweight7", h)
        assert est.mu == coef[0]
        assert est.g1 == coef[1]

    def test_insufficient_support(self):
        w_hat = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
        d = np.array([0, 0, 1, 1, 1])
        data = simple_data(np.ones(5), d, w_hat)
        with pytest.raises(InsufficientSupportError, match="at least 4"):
            local_quadratic(data, [], w_hat, "gaussian", h=0.5)

    def test_matches_nelder_mead_oracle(self):
        data, theta, w_hat = make_sample(43, n=220)
        t = loo_ecdf(w_hat)
        h = 0.45
        kw = eval_kernel("epanechnikov", (1.0 - t) / h)
        mask = (data.d == 1) & (kw > 0)
        u, w = t[mask] - 1.0, kw[mask]
        resid = data.y[mask] - data.z[mask] @ theta

        def sse(p):
            return np.sum(w * (resid - p[0] - p[1] * u - 0.5 * p[2] * u * u) ** 2)

        res = minimize(
            sse,
            x0=np.array([resid.mean(), 0.0, 0.0]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 40_000, "maxfev": 40_000},
        )
        est = local_quadratic(data, theta, w_hat, "epanechnikov", h)
        assert est.mu == pytest.approx(res.x[0], abs=1e-4)
        assert est.g1 == pytest.approx(res.x[1], abs=1e-3)
        assert est.g1prime == pytest.approx(res.x[2], abs=1e-2)


class TestDisturbanceVariance:
    def test_zero_for_exact_fit(self):
        data, theta, w_hat = make_sample(51, n=100, noise=0.0, mu=3.0)
        v = disturbance_variance(data, theta, w_hat, 3.0, "gaussian", 0.3)
        assert v == pytest.approx(0.0, abs=1e-24)

    def test_manual_weighted_second_moment(self):
        w_hat = np.array([0.0, 1.0, 2.0])
        y = np.array([1.0, 3.0, 5.0])
        data = simple_data(y, [1, 1, 1], w_hat)
        kw = eval_kernel("epanechnikov", np.array([2.0, 1.0, 0.0]))
        expected = np.dot(kw, (y - 2.0) ** 2) / kw.sum()
        v = disturbance_variance(data, [], w_hat, 2.0, "epanechnikov", 0.5)
        assert v == pytest.approx(expected, rel=1e-14)

    def test_nonnegative_on_random_samples(self):
        for seed in range(5):
            data, theta, w_hat = make_sample(600 + seed, n=80)
            assert disturbance_variance(data, theta, w_hat, 0.0, "gaussian", 0.25) >= 0

    def test_empty_window(self):
        w = np.array([0.0, 1.0, 2.0, 3.0])
        data = simple_data(np.ones(4), [1, 0, 0, 0], w)
        with pytest.raises(EmptyWindowError):
            disturbance_variance(data, [], w, 0.0, "epanechnikov", 0.1)

    def test_validates_pilot(self):
        data, theta, w_hat = make_sample(52, n=30)
        with pytest.raises(ValueError):
            disturbance_variance(data, theta, w_hat, np.nan, "gaussian", 0.3)


ESTIMATOR_CALLS = [
    ("tail_mean", lambda d, th, w: tail_mean(d, th, w, gamma=0.3)),
    ("smoothed_tail_mean", lambda d, th, w: smoothed_tail_mean(d, th, w, gamma=0.1)),
    ("local_constant", lambda d, th, w: local_constant(d, th, w, "gaussian", 0.25)),
    ("local_linear", lambda d, th, w: local_linear(d, th, w, "epanechnikov", 0.4)),
    ("local_quadratic", lambda d, th, w: local_quadratic(d, th, w, "poly7", 0.45)),
]


class TestSharedInvariants:
    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_location_equivariance(self, name, call):
        data, theta, w_hat = make_sample(71, n=250)
        shifted = Dataset(y=data.y + 5.25, d=data.d, x=data.x, z=data.z)
        assert call(shifted, theta, w_hat).mu == pytest.approx(
            call(data, theta, w_hat).mu + 5.25, rel=1e-12, abs=1e-12
        )

    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_scale_equivariance(self, name, call):
        data, theta, w_hat = make_sample(72, n=250, q=0)
        scaled = Dataset(y=4.0 * data.y, d=data.d, x=data.x, z=data.z)
        assert call(scaled, [], w_hat).mu == pytest.approx(
            4.0 * call(data, [], w_hat).mu, rel=1e-13
        )

    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_permutation_invariance(self, name, call):
        data, theta, w_hat = make_sample(73, n=250)
        perm = np.random.default_rng(99).permutation(data.n)
        permuted = Dataset(
            y=data.y[perm], d=data.d[perm], x=data.x[perm], z=data.z[perm]
        )
        assert call(permuted, theta, w_hat[perm]).mu == pytest.approx(
            call(data, theta, w_hat).mu, rel=1e-11, abs=1e-11
        )

    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_censored_outcomes_never_read(self, name, call):
        data, theta, w_hat = make_sample(74, n=250)
        y_poisoned = data.y.copy()
        y_poisoned[data.d == 0] = np.nan
        poisoned = Dataset(y=y_poisoned, d=data.d, x=data.x, z=data.z)
        assert call(poisoned, theta, w_hat).mu == call(data, theta, w_hat).mu

    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_theta_shape_validated(self, name, call):
        data, theta, w_hat = make_sample(75, n=100)  # q == 1
        with pytest.raises(ValueError, match="theta"):
            call(data, np.array([0.1, 0.2]), w_hat)

    @pytest.mark.parametrize("name,call", ESTIMATOR_CALLS)
    def test_index_length_validated(self, name, call):
        data, theta, w_hat = make_sample(76, n=100)
        with pytest.raises(ValueError):
            call(data, theta, w_hat[:-1])
