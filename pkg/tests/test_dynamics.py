import math

import numpy as np
import pytest

from ckstab.dynamics import make_grid, simulate, solve_linear_scalar
from ckstab.fraccalc import FracOrder, SampledFunction, katugampola_integral
from ckstab.specfun import ml

from conftest import lorenz_matrix
from oracles import ml_laplace_reference


class TestGrid:
    def test_endpoints_reproduced(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        w, t = make_grid(order, horizon=7.0, n=64)
        assert abs(t[0] - 1.0) <= 1e-12
        assert abs(t[-1] - 7.0) <= 1e-12 * 7.0
        assert w[0] == 0.0

    def test_horizon_validation(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=2.0)
        with pytest.raises(ValueError):
            make_grid(order, horizon=1.5, n=32)


class TestSolveLinearScalar:
    def test_pure_ml_mode(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        tr = solve_linear_scalar(-1.0, 1.0, None, order, horizon=3.0, n=256)
        w = tr.w_nodes
        for idx in (0, 32, 256):
            expected = ml(0.9, -(w[idx] ** 0.9)).real
            assert tr.states[idx, 0] == pytest.approx(expected, rel=1e-8, abs=1e-14)

    def test_frozen_endpoint_value(self):
        # 50-digit oracle of E_alpha(-W^alpha) at t = 3
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        tr = solve_linear_scalar(-1.0, 1.0, None, order, horizon=3.0, n=512)
        assert tr.states[-1, 0] == pytest.approx(0.15176767783883643, rel=1e-9)

    def test_zero_lambda_reduces_to_integral(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        w, _ = make_grid(order, horizon=3.0, n=512)
        forcing = SampledFunction(grid=w, values=np.sin(w))
        tr = solve_linear_scalar(0.0, 2.0, forcing, order)
        integral = katugampola_integral(forcing, order)
        assert np.abs(tr.states[:, 0] - (2.0 + integral.values)).max() <= 1e-6

    def test_needs_grid_or_forcing(self):
        order = FracOrder(alpha=0.9)
        with pytest.raises(ValueError):
            solve_linear_scalar(-1.0, 1.0, None, order)


class TestSimulate:
    def test_constant_solution(self):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        tr = simulate(np.zeros((2, 2)), None, [3.0, -1.0], order, horizon=5.0, n=64)
        assert np.abs(tr.states - np.array([3.0, -1.0])).max() == 0.0
        assert not tr.diverged

    @pytest.mark.parametrize("lam", [-0.5, -2.0])
    @pytest.mark.parametrize("alpha", [0.4, 0.9])
    @pytest.mark.parametrize("rho", [0.8, 1.0, 1.2])
    def test_matches_closed_form_lattice(self, lam, alpha, rho):
        order = FracOrder(alpha=alpha, rho=rho, t0=1.0)
        sim = simulate(np.array([[lam]]), None, [1.0], order, horizon=11.0, n=2048)
        ref = solve_linear_scalar(lam, 1.0, None, order, horizon=11.0, n=2048)
        err = np.abs(sim.states[:, 0] - ref.states[:, 0]).max()
        assert err <= 1e-3

    def test_convergence_order(self):
        order = FracOrder(alpha=0.4, rho=1.2, t0=1.0)
        errs = []
        for n in (1024, 2048):
            sim = simulate(np.array([[-2.0]]), None, [1.0], order, horizon=11.0, n=n)
            ref = solve_linear_scalar(-2.0, 1.0, None, order, horizon=11.0, n=n)
            errs.append(np.abs(sim.states[:, 0] - ref.states[:, 0]).max())
        assert math.log2(errs[0] / errs[1]) >= 0.9

    def test_rho_one_equals_shifted_caputo(self):
        # identical code path: the w-grid is the t-grid shifted by t0
        order = FracOrder(alpha=0.7, rho=1.0, t0=2.0)
        sim = simulate(np.array([[-1.0]]), None, [1.0], order, horizon=8.0, n=512)
        assert np.allclose(sim.w_nodes, sim.t_nodes - 2.0, atol=1e-12)
        for idx in (50, 511):
            expected = ml_laplace_reference(0.7, 1.0, -(sim.w_nodes[idx] ** 0.7))
            assert sim.states[idx, 0] == pytest.approx(expected.real, abs=2e-5)

    def test_divergence_detection(self):
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        tr = simulate(np.array([[4.0]]), None, [1.0], order, horizon=200.0, n=512)
        assert tr.diverged
        assert tr.cut_index is not None
        assert tr.n_nodes == tr.cut_index
        assert math.isfinite(tr.sup_norm)

    def test_step_count_validated(self):
        order = FracOrder(alpha=0.9)
        with pytest.raises(ValueError):
            simulate(np.eye(1), None, [1.0], order, horizon=2.0, n=8)

    def test_lorenz_decay(self, lorenz_g):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        tr = simulate(lorenz_matrix(), lorenz_g, [0.1, 0.1, 0.1], order, horizon=51.0, n=2048)
        assert not tr.diverged
        assert tr.final_norm < 1e-2
        assert tr.sup_norm == pytest.approx(tr.node_norms()[0])

    def test_small_x0_stability_scaling(self, lorenz_g):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        a = lorenz_matrix()
        sups = []
        for scale in (1.0, 0.5):
            x0 = scale * np.array([1e-3, 1e-3, 1e-3]) / math.sqrt(3.0)
            tr = simulate(a, lorenz_g, x0, order, horizon=51.0, n=2048)
            norms = tr.node_norms()
            assert np.argmax(norms) == 0  # sup attained at the initial node
            sups.append(tr.sup_norm)
        assert abs(sups[0] / (2.0 * sups[1]) - 1.0) <= 0.1
