import math

import numpy as np
import pytest

from ckstab.dynamics import make_grid, simulate, _trajectory
from ckstab.errors import SectorConditionError, UnstableSpectrumError
from ckstab.fraccalc import FracOrder
from ckstab.perron import (
    certify,
    estimate_C,
    estimate_supE,
    local_lipschitz,
    lp_apply,
    picard_iterate,
)
from ckstab.specfun import ml
from ckstab.spectral import modal_transform

from conftest import lorenz_matrix


@pytest.fixture(scope="module")
def lorenz_certificate(lorenz_cfg_module):
    cfg = lorenz_cfg_module
    return certify(cfg.closed_loop(), cfg.nonlinearity, 0.9, cfg.order, r=0.05)


@pytest.fixture(scope="module")
def lorenz_cfg_module():
    from ckstab.config import builtin_config

    return builtin_config("lorenz")


@pytest.fixture(scope="module")
def lorenz_modal(lorenz_cfg_module, lorenz_certificate):
    cfg = lorenz_cfg_module
    return modal_transform(cfg.closed_loop(), cfg.nonlinearity, lorenz_certificate.delta)


class TestEstimateC:
    @pytest.mark.parametrize("alpha", [0.5, 0.9])
    @pytest.mark.parametrize("lam", [-1.0, -2.8229, -3.0])
    def test_real_negative_oracle(self, alpha, lam):
        # d/dv E_alpha(lam v^alpha) integrates the kernel exactly: C = 1/|lam|
        assert estimate_C(alpha, lam) == pytest.approx(1.0 / abs(lam), abs=1e-3)

    def test_rho_and_t0_invariance(self):
        c1 = estimate_C(0.9, -2.0, FracOrder(0.9, 1.0, 1.0))
        c2 = estimate_C(0.9, -2.0, FracOrder(0.9, 1.2, 3.0))
        assert abs(c1 - c2) <= 1e-10

    def test_sector_enforced(self):
        with pytest.raises(SectorConditionError):
            estimate_C(0.9, 1.0)

    def test_complex_in_sector(self):
        lam = 2.0 * np.exp(1j * 0.6 * math.pi)
        c = estimate_C(0.9, lam)
        assert c > 0.0 and math.isfinite(c)


class TestEstimateSupE:
    def test_real_negative_is_one(self):
        assert estimate_supE(0.9, -3.0) == pytest.approx(1.0, abs=1e-12)

    def test_zero_point_contributes_one(self):
        assert estimate_supE(0.5, -0.3) >= 1.0

    def test_complex_matches_dense_sampling(self):
        alpha = 0.9
        lam = complex(2.0 * math.cos(0.55 * math.pi), 2.0 * math.sin(0.55 * math.pi))
        est = estimate_supE(alpha, lam)
        dense = max(
            abs(ml(alpha, lam * u)) for u in np.geomspace(1e-6, 1e4, 10000)
        )
        assert est >= dense * (1.0 - 1e-6)
        assert est <= dense * 1.05 + 1e-9

    def test_sector_enforced(self):
        with pytest.raises(SectorConditionError):
            estimate_supE(0.9, 0.5)


class TestLocalLipschitz:
    def test_zero_map(self):
        assert local_lipschitz(lambda x: np.zeros(2), 0.5, dim=2) == 0.0

    def test_scalar_square(self):
        est = local_lipschitz(lambda x: x**2, 0.1, dim=1)
        assert est == pytest.approx(0.2, rel=0.05)

    def test_lorenz_quadratic_bounded_by_jacobian(self, lorenz_cfg_module):
        g = lorenz_cfg_module.nonlinearity
        est = local_lipschitz(g, 0.1, dim=3)
        bound = math.sqrt(2.0) * 0.1
        assert 0.3 * bound <= est <= bound * (1.0 + 1e-9)

    def test_override_short_circuits(self):
        assert local_lipschitz(lambda x: x, 1.0, dim=1, override=0.123) == 0.123

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            local_lipschitz(lambda x: x, 1.0, dim=1, samples=10)

    def test_deterministic_under_seed(self):
        f = lambda x: np.sin(x)
        a = local_lipschitz(f, 0.3, dim=2, seed=42)
        b = local_lipschitz(f, 0.3, dim=2, seed=42)
        assert a == b


class TestLpApply:
    def test_zero_h_gives_ml_envelope(self):
        ms = modal_transform(np.diag([-1.0, -2.0]), None, delta=0.5)
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        w, _ = make_grid(order, 5.0, 128)
        xi = _trajectory(order, w, np.vstack([np.sin(w), np.cos(w)]).T)
        x = np.array([0.4, -0.2])
        out = lp_apply(ms, x, xi, order)
        for idx in (0, 17, 128):
            assert out.states[idx, 0] == pytest.approx(
                0.4 * ml(0.9, -(w[idx] ** 0.9)).real, rel=1e-7, abs=1e-12
            )
            assert out.states[idx, 1] == pytest.approx(
                -0.2 * ml(0.9, -2.0 * w[idx] ** 0.9).real, rel=1e-7, abs=1e-12
            )

    def test_zero_initial_zero_h_is_zero(self):
        ms = modal_transform(np.diag([-1.0, -2.0]), None, delta=0.5)
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        w, _ = make_grid(order, 5.0, 64)
        xi = _trajectory(order, w, np.random.default_rng(0).normal(size=(65, 2)))
        out = lp_apply(ms, np.zeros(2), xi, order)
        assert np.abs(out.states).max() == 0.0

    def test_fixed_point_of_simulated_solution(self, lorenz_modal):
        ms = lorenz_modal
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        x = np.full(3, 1e-3 / math.sqrt(3.0))
        tr = simulate(ms.block_matrix().real, lambda y: ms.h(y).real, x, order, 21.0, 1024)
        fx = lp_apply(ms, x, tr, order)
        resid = np.linalg.norm(fx.states - tr.states, axis=1).max()
        assert resid <= 1e-3

    def test_dimension_mismatch(self, lorenz_modal):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        w, _ = make_grid(order, 5.0, 32)
        xi = _trajectory(order, w, np.zeros((33, 2)))
        with pytest.raises(ValueError):
            lp_apply(lorenz_modal, np.zeros(3), xi, order)


class TestPicard:
    def test_zero_h_converges_in_one_step(self):
        ms = modal_transform(np.diag([-1.0, -2.0]), None, delta=0.5)
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        xi, residuals = picard_iterate(ms, [0.3, 0.1], order, horizon=6.0, n=128, max_iter=6, tol=1e-13)
        assert residuals[1] <= 1e-13

    def test_geometric_contraction(self, lorenz_modal, lorenz_certificate):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        x = np.full(3, 1e-3 / math.sqrt(3.0))
        xi, residuals = picard_iterate(
            lorenz_modal, x, order, horizon=21.0, n=1024, max_iter=10, tol=1e-14,
            certificate=lorenz_certificate,
        )
        ratios = [residuals[i + 1] / residuals[i] for i in range(len(residuals) - 1) if residuals[i] > 1e-13]
        assert ratios and max(ratios) <= lorenz_certificate.q + 0.1

    def test_agrees_with_simulate(self, lorenz_modal):
        ms = lorenz_modal
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        x = np.full(3, 1e-3 / math.sqrt(3.0))
        tr = simulate(ms.block_matrix().real, lambda y: ms.h(y).real, x, order, 21.0, 1024)
        xi, _ = picard_iterate(ms, x, order, horizon=21.0, n=1024, max_iter=10, tol=1e-12)
        assert np.linalg.norm(xi.states - tr.states, axis=1).max() <= 2e-3

    def test_warns_outside_certified_ball(self, lorenz_modal, lorenz_certificate):
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        with pytest.warns(UserWarning):
            picard_iterate(
                lorenz_modal, np.full(3, 10.0), order, horizon=3.0, n=64,
                max_iter=2, tol=1e-12, certificate=lorenz_certificate,
            )


class TestCertify:
    def test_lorenz_certificate_contents(self, lorenz_certificate):
        cert = lorenz_certificate
        assert cert.valid and cert.q < 1.0
        assert cert.r_star > 0.0
        assert abs(2.0 * cert.delta * cert.C - 1.0) <= 1e-14
        assert cert.C == pytest.approx(1.0 / 2.8229, abs=1e-3)
        assert cert.supE == pytest.approx(1.0, abs=1e-9)
        assert cert.numerical_lipschitz
        assert cert.cond_TP >= 1.0
        assert cert.t_max > cert.order.t0

    def test_trivial_linear_system(self):
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        cert = certify(np.diag([-1.0, -2.0]), None, 0.9, order, r=1.0)
        assert cert.lip_h == 0.0 and cert.q == 0.0
        assert cert.r_star == pytest.approx(1.0, abs=1e-9)
        assert cert.valid

    def test_huge_radius_invalid_with_suggestion(self, lorenz_cfg_module):
        cfg = lorenz_cfg_module
        cert = certify(cfg.closed_loop(), cfg.nonlinearity, 0.9, cfg.order, r=1000.0)
        assert not cert.valid
        assert cert.q > 1.0
        assert cert.r_star == 0.0
        assert cert.suggested_r is not None and 0.0 < cert.suggested_r < 1000.0

    def test_unstable_spectrum_rejected(self):
        order = FracOrder(alpha=0.9, rho=1.0, t0=1.0)
        with pytest.raises(UnstableSpectrumError):
            certify(np.eye(2), None, 0.9, order, r=0.1)

    def test_contraction_inequality_sampled(self, lorenz_modal, lorenz_certificate):
        # |F xi - F xi_hat| <= (q + 0.05) |xi - xi_hat| on the r-ball
        from ckstab.perron import _lp_apply_tables, _OperatorTables

        ms, cert = lorenz_modal, lorenz_certificate
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        w, _ = make_grid(order, 11.0, 256)
        tables = _OperatorTables(ms, order.alpha, w)
        rng = np.random.default_rng(12)
        x = np.full(3, 0.5 * cert.r_star)
        for _ in range(20):
            a = rng.normal(size=(257, 3))
            b = rng.normal(size=(257, 3))
            a *= cert.r / max(1e-12, np.linalg.norm(a, axis=1).max())
            b *= cert.r / max(1e-12, np.linalg.norm(b, axis=1).max())
            fa = _lp_apply_tables(ms, x, _trajectory(order, w, a), order, tables)
            fb = _lp_apply_tables(ms, x, _trajectory(order, w, b), order, tables)
            lhs = np.linalg.norm(fa.states - fb.states, axis=1).max()
            rhs = np.linalg.norm(a - b, axis=1).max()
            assert lhs <= (cert.q + 0.05) * rhs

    def test_boundedness_and_ball_invariance_sampled(self, lorenz_modal, lorenz_certificate):
        from ckstab.perron import _lp_apply_tables, _OperatorTables

        ms, cert = lorenz_modal, lorenz_certificate
        order = FracOrder(alpha=0.9, rho=1.2, t0=1.0)
        w, _ = make_grid(order, 11.0, 256)
        tables = _OperatorTables(ms, order.alpha, w)
        rng = np.random.default_rng(21)
        x = np.full(3, cert.r_star / math.sqrt(3.0) * 0.999)
        xnorm = np.linalg.norm(x)
        for _ in range(20):
            a = rng.normal(size=(257, 3))
            a *= cert.r / np.linalg.norm(a, axis=1).max()
            fx = _lp_apply_tables(ms, x, _trajectory(order, w, a), order, tables)
            out_norm = np.linalg.norm(fx.states, axis=1).max()
            xi_norm = np.linalg.norm(a, axis=1).max()
            assert out_norm <= cert.supE * xnorm + cert.q * xi_norm + 0.05
            assert out_norm <= cert.r * (1.0 + 1e-6)
