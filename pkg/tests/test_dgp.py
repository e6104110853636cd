"""Tests for the simulation data generator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from boundary_intercept.dgp import (
    CALIBRATION_DRAWS,
    EPS_DISTRIBUTIONS,
    SimulationDesign,
    calibrate_c0,
    generate,
    standardized_draw,
    variable_stream,
)
from boundary_intercept.data import Dataset
from boundary_intercept.estimators import tail_mean


class TestVariableStream:
    def test_identical_keys_reproduce_bitwise(self):
        a = variable_stream(42, 7, "eps").standard_normal(100)
        b = variable_stream(42, 7, "eps").standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_tags_differ(self):
        a = variable_stream(42, 7, "x1").standard_normal(100)
        b = variable_stream(42, 7, "x2").standard_normal(100)
        assert not np.array_equal(a, b)

    def test_distinct_reps_differ(self):
        a = variable_stream(42, 0, "e").standard_normal(100)
        b = variable_stream(42, 1, "e").standard_normal(100)
        assert not np.array_equal(a, b)

    def test_unknown_tag(self):
        with pytest.raises(ValueError, match="tag"):
            variable_stream(1, 0, "nope")


class TestStandardizedDraw:
    @pytest.mark.parametrize("dist", EPS_DISTRIBUTIONS)
    def test_mean_and_variance(self, dist):
        x = standardized_draw(dist, variable_stream(0, 0, "eps"), 1_000_000)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.02

    def test_chisq3_is_right_skewed(self):
        x = standardized_draw("chisq3", variable_stream(0, 0, "eps"), 1_000_000)
        skew = np.mean((x - x.mean()) ** 3) / x.var() ** 1.5
        assert skew > 0.5

    def test_symmetric_families_have_small_skew(self):
        x = standardized_draw("normal", variable_stream(0, 0, "eps"), 1_000_000)
        skew = np.mean((x - x.mean()) ** 3) / x.var() ** 1.5
        assert abs(skew) < 0.05

    def test_fixed_key_reproduces_bitwise(self):
        for dist in EPS_DISTRIBUTIONS:
            a = standardized_draw(dist, variable_stream(3, 5, "eps"), 1000)
            b = standardized_draw(dist, variable_stream(3, 5, "eps"), 1000)
            assert np.array_equal(a, b)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="eps_dist"):
            standardized_draw("cauchy", variable_stream(0, 0, "eps"), 10)


class TestCalibrateC0:
    def test_normal_median_is_zero(self):
        assert abs(calibrate_c0("normal", 0.5)) < 0.005

    def test_t3_median_is_zero(self):
        # S = eps - X1 - X2 is symmetric whenever eps is.
        assert abs(calibrate_c0("t3", 0.5)) < 0.005

    @pytest.mark.parametrize("dist,target", [("chisq3", 0.8), ("normal", 0.2)])
    def test_fresh_sample_hits_target_probability(self, dist, target):
        c0 = calibrate_c0(dist, target)
        n = 1_000_000
        x1 = variable_stream(777, 5, "x1").standard_normal(n)
        x2 = standardized_draw("t3", variable_stream(777, 5, "x2"), n)
        eps = standardized_draw(dist, variable_stream(777, 5, "eps"), n)
        assert abs(np.mean(c0 + x1 + x2 > eps) - target) < 0.005

    def test_monotone_in_target(self):
        lo = calibrate_c0("normal", 0.2)
        hi = calibrate_c0("normal", 0.8)
        assert lo < 0.0 < hi

    def test_validation(self):
        with pytest.raises(ValueError, match="target_p"):
            calibrate_c0("normal", 0.0)
        with pytest.raises(ValueError, match="target_p"):
            calibrate_c0("normal", 1.0)

    def test_calibration_sample_size_constant(self):
        assert CALIBRATION_DRAWS == 2_000_000


class TestSimulationDesign:
    def test_accepts_typical_cell(self):
        design = SimulationDesign("normal", 0.5, c0=0.0, n=1000, mu0=0.0, base_seed=1)
        assert design.eps_dist == "normal"

    def test_validation(self):
        with pytest.raises(ValueError, match="eps_dist"):
            SimulationDesign("laplace", 0.5, 0.0, 1000)
        with pytest.raises(ValueError, match="selection_prob"):
            SimulationDesign("normal", 1.0, 0.0, 1000)
        with pytest.raises(ValueError, match="n >= 50"):
            SimulationDesign("normal", 0.5, 0.0, 49)
        with pytest.raises(TypeError):
            SimulationDesign("normal", 0.5, 0.0, 1000.0)
        with pytest.raises(ValueError, match="finite"):
            SimulationDesign("normal", 0.5, math.nan, 1000)


NORMAL_50 = SimulationDesign("normal", 0.5, c0=0.0, n=100_000, mu0=0.0, base_seed=11)


class TestGenerate:
    def test_repeated_calls_are_identical(self):
        a = generate(NORMAL_50, 3)
        b = generate(NORMAL_50, 3)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.d, b.d)
        assert np.array_equal(a.x, b.x)

    def test_distinct_replications_differ(self):
        a = generate(NORMAL_50, 0)
        b = generate(NORMAL_50, 1)
        assert not np.array_equal(a.x, b.x)

    def test_shapes_and_selection_rate(self):
        data = generate(NORMAL_50, 0)
        assert data.x.shape == (NORMAL_50.n, 2)
        assert data.q == 0
        assert abs(data.d.mean() - 0.5) < 0.01

    def test_construction_identity_and_joint_moments(self):
        # Rebuild the tagged draws and confirm y = (mu0 + eps + e) d exactly;
        # then check Var(U) = 2 and Corr(U, eps) = 1/sqrt(2).
        design = SimulationDesign("normal", 0.5, c0=0.0, n=100_000, mu0=0.25, base_seed=11)
        rep = 2
        data = generate(design, rep)
        n = design.n
        x1 = variable_stream(design.base_seed, rep, "x1").standard_normal(n)
        x2 = standardized_draw("t3", variable_stream(design.base_seed, rep, "x2"), n)
        eps = standardized_draw(design.eps_dist, variable_stream(design.base_seed, rep, "eps"), n)
        e = variable_stream(design.base_seed, rep, "e").standard_normal(n)
        u = eps + e
        assert np.array_equal(data.x, np.column_stack([x1, x2]))
        assert np.array_equal(data.d, (design.c0 + x1 + x2 > eps).astype(int))
        assert np.array_equal(data.y, (design.mu0 + u) * data.d)
        assert abs(u.var() - 2.0) < 0.05
        corr = np.corrcoef(u, eps)[0, 1]
        assert abs(corr - 1.0 / math.sqrt(2.0)) < 0.02

    def test_censored_outcomes_are_zero_and_never_read(self):
        design = SimulationDesign("chisq3", 0.5, c0=-0.09, n=2000, base_seed=5)
        data = generate(design, 0)
        assert np.all(data.y[data.d == 0] == 0.0)
        w_hat = data.x.sum(axis=1)
        poisoned = Dataset(
            y=np.where(data.d == 1, data.y, np.nan), d=data.d, x=data.x
        )
        est = tail_mean(data, np.empty(0), w_hat, gamma=0.0)
        est_poisoned = tail_mean(poisoned, np.empty(0), w_hat, gamma=0.0)
        assert est.mu == est_poisoned.mu

    def test_selection_rate_tracks_calibrated_offsets(self):
        # The three censoring levels materialize in the generated samples.
        for target, c0 in [(0.2, -1.37524), (0.8, 1.36926)]:
            design = SimulationDesign("normal", target, c0=c0, n=100_000, base_seed=4)
            data = generate(design, 0)
            assert abs(data.d.mean() - target) < 0.01
