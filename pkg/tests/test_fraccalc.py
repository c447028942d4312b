import math

import numpy as np
import pytest

from ckstab.errors import GridError, OrderError
from ckstab.fraccalc import FracOrder, SampledFunction, ck_derivative, katugampola_integral
from ckstab.specfun import gamma


def G(x):
    return float(gamma(x).real)


def power_samples(beta, n, w_end=2.0):
    grid = np.linspace(0.0, w_end, n + 1)
    vals = grid**beta if beta > 0 else np.ones_like(grid)
    return SampledFunction(grid=grid, values=vals)


class TestFracOrder:
    def test_validation(self):
        with pytest.raises(OrderError):
            FracOrder(alpha=-0.1)
        with pytest.raises(OrderError):
            FracOrder(alpha=0.5, rho=0.0)
        with pytest.raises(OrderError):
            FracOrder(alpha=0.5, t0=0.0)
        FracOrder(alpha=1.5)  # integrals admit alpha >= 1

    def test_time_maps_roundtrip(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        t = np.linspace(1.0, 7.0, 23)
        assert np.allclose(order.t_of_w(order.w_of_t(t)), t, rtol=1e-13)

    def test_rho_one_is_shift(self):
        order = FracOrder(alpha=0.9, rho=1.0, t0=2.0)
        t = np.linspace(2.0, 9.0, 17)
        assert np.allclose(order.w_of_t(t), t - 2.0, atol=1e-14)


class TestSampledFunction:
    def test_uniformity_enforced(self):
        with pytest.raises(GridError):
            SampledFunction(grid=np.array([0.0, 1.0, 3.0]), values=np.zeros(3))

    def test_grid_must_start_at_zero(self):
        with pytest.raises(GridError):
            SampledFunction(grid=np.array([1.0, 2.0, 3.0]), values=np.zeros(3))

    def test_finite_values_enforced(self):
        with pytest.raises(GridError):
            SampledFunction(grid=np.linspace(0, 1, 3), values=np.array([0.0, np.inf, 1.0]))

    def test_from_times(self):
        order = FracOrder(alpha=0.5, rho=1.2, t0=1.0)
        w = np.linspace(0.0, 3.0, 65)
        t = order.t_of_w(w)
        sf = SampledFunction.from_times(t, np.sin(w), order)
        assert sf.h == pytest.approx(3.0 / 64.0, rel=1e-12)


class TestPowerRule:
    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("alpha", [0.3, 0.9])
    @pytest.mark.parametrize("rho", [0.5, 1.0, 1.2])
    def test_lattice_at_n4096(self, beta, alpha, rho):
        order = FracOrder(alpha=0.5, rho=rho, t0=1.0)
        f = power_samples(beta, 4096)
        result = katugampola_integral(f, order, alpha_i=alpha)
        exact = G(beta + 1.0) / G(alpha + beta + 1.0) * f.grid ** (beta + alpha)
        err = np.abs(result.values - exact).max() / np.abs(exact).max()
        assert err <= 1e-5

    def test_constant_case_any_node(self):
        # f = c: node value c * W^alpha / Gamma(alpha+1)
        order = FracOrder(alpha=0.7, rho=1.1, t0=1.0)
        grid = np.linspace(0.0, 1.5, 257)
        f = SampledFunction(grid=grid, values=3.0 * np.ones_like(grid))
        result = katugampola_integral(f, order)
        exact = 3.0 * grid**0.7 / G(1.7)
        assert np.abs(result.values - exact).max() <= 1e-10

    def test_order_validation(self):
        f = power_samples(1.0, 32)
        with pytest.raises(OrderError):
            katugampola_integral(f, FracOrder(alpha=0.5), alpha_i=-0.2)


class TestSemigroup:
    def test_split_orders_match_direct(self):
        order = FracOrder(alpha=0.5, rho=1.2, t0=1.0)
        grid = np.linspace(0.0, 2.0, 4097)
        f = SampledFunction(grid=grid, values=np.sin(grid))
        left = katugampola_integral(katugampola_integral(f, order, 0.4), order, 0.3)
        right = katugampola_integral(f, order, 0.7)
        assert np.abs(left.values - right.values).max() <= 1e-4

    def test_error_decreases_under_refinement(self):
        order = FracOrder(alpha=0.5, rho=1.0, t0=1.0)
        errs = []
        for n in (512, 2048):
            grid = np.linspace(0.0, 2.0, n + 1)
            f = SampledFunction(grid=grid, values=np.sin(grid))
            left = katugampola_integral(katugampola_integral(f, order, 0.4), order, 0.3)
            right = katugampola_integral(f, order, 0.7)
            errs.append(np.abs(left.values - right.values).max())
        assert errs[1] < errs[0]


class TestDerivative:
    def test_constant_is_zero(self):
        order = FracOrder(alpha=0.6, rho=1.2, t0=1.0)
        grid = np.linspace(0.0, 2.0, 513)
        f = SampledFunction(grid=grid, values=5.0 * np.ones_like(grid))
        d = ck_derivative(f, order)
        assert np.abs(d.values).max() <= 1e-12
        assert d.first_node_extrapolated

    def test_power_rule_with_inversion(self):
        # derivative of W^1.3 at order 0.6, checked by re-integration
        order = FracOrder(alpha=0.6, rho=1.2, t0=1.0)
        grid = np.linspace(0.0, 2.0, 4097)
        f = SampledFunction(grid=grid, values=grid**1.3)
        d = ck_derivative(f, order)
        exact = G(2.3) / G(1.7) * grid**0.7
        assert np.abs(d.values[1:] - exact[1:]).max() / np.abs(exact).max() <= 1e-3
        back = katugampola_integral(SampledFunction(grid=grid, values=d.values), order)
        assert np.abs(back.values - f.values).max() <= 1e-3

    def test_inversion_smooth(self):
        order = FracOrder(alpha=0.8, rho=1.0, t0=1.0)
        grid = np.linspace(0.0, 2.0, 4097)
        f = SampledFunction(grid=grid, values=np.sin(grid) + grid)
        d = ck_derivative(f, order)
        back = katugampola_integral(SampledFunction(grid=grid, values=d.values), order)
        assert np.abs(back.values - (f.values - f.values[0])).max() <= 1e-3

    def test_linearity(self):
        order = FracOrder(alpha=0.6, rho=1.2, t0=1.0)
        grid = np.linspace(0.0, 2.0, 257)
        f = SampledFunction(grid=grid, values=grid**1.3)
        g = SampledFunction(grid=grid, values=np.cos(grid))
        combo = SampledFunction(grid=grid, values=2.0 * f.values + 3.0 * g.values)
        lhs = ck_derivative(combo, order).values
        rhs = 2.0 * ck_derivative(f, order).values + 3.0 * ck_derivative(g, order).values
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())

    def test_katugampola_variant_adds_base_term(self):
        order = FracOrder(alpha=0.4, rho=1.0, t0=1.0)
        grid = np.linspace(0.0, 2.0, 513)
        f = SampledFunction(grid=grid, values=np.full_like(grid, 2.5))
        d = ck_derivative(f, order, caputo=False)
        expected = 2.5 * grid[1:] ** (-0.4) / G(0.6)
        assert np.abs(d.values[1:] - expected).max() <= 1e-10

    def test_alpha_range_enforced(self):
        grid = np.linspace(0.0, 1.0, 65)
        f = SampledFunction(grid=grid, values=grid)
        with pytest.raises(OrderError):
            ck_derivative(f, FracOrder(alpha=1.2))

    def test_rho_one_matches_classical_caputo_power_rule(self):
        # with rho = 1 the operator is the classical Caputo derivative in t - t0
        order = FracOrder(alpha=0.5, rho=1.0, t0=1.0)
        grid = np.linspace(0.0, 1.0, 2049)
        f = SampledFunction(grid=grid, values=grid**2)
        d = ck_derivative(f, order)
        exact = G(3.0) / G(2.5) * grid**1.5
        assert np.abs(d.values[1:] - exact[1:]).max() <= 2e-4


class TestConvergenceOrder:
    def test_integral_order_at_least_one(self):
        order = FracOrder(alpha=0.5, rho=1.2, t0=1.0)
        errs = []
        ns = (256, 512, 1024, 2048)
        for n in ns:
            grid = np.linspace(0.0, 2.0, n + 1)
            f = SampledFunction(grid=grid, values=np.exp(-grid) * np.sin(2 * grid))
            coarse = katugampola_integral(f, order, 0.5)
            fine_grid = np.linspace(0.0, 2.0, 8 * n + 1)
            ff = SampledFunction(grid=fine_grid, values=np.exp(-fine_grid) * np.sin(2 * fine_grid))
            fine = katugampola_integral(ff, order, 0.5)
            errs.append(np.abs(coarse.values - fine.values[::8]).max())
        slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(len(ns) - 1)]
        assert min(slopes) >= 1.0
