"""Katugampola fractional integral and Caputo-Katugampola derivative.

All discretization lives in the transformed time w = (t^rho - t0^rho)/rho,
where both operators reduce to their classical Riemann-Liouville / Caputo
forms with a stationary convolution kernel. Grids are therefore uniform in w.

The integral uses product-trapezoidal weights (piecewise-linear data
integrated exactly against the singular kernel) plus starting-weight
corrections that make the rule exact on the half-power monomials
w^{0, 1/2, 1, 3/2, 2}; without them the first-node interpolation error of
root-type integrands is O(1) relative and no uniform refinement removes it.
The derivative uses the standard L1 scheme on first differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, OrderError
from .specfun import gamma

__all__ = [
    "FracOrder",
    "SampledFunction",
    "katugampola_integral",
    "ck_derivative",
]

# Exponents above (order - 1) = 1 must stay out of this basis: their plain-rule
# residual is the rule's own O(h^2) global drift, which grows along the
# interval and would force unbounded correction weights.
_CORRECTION_EXPONENTS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class FracOrder:
    """Operator order alpha with time deformation rho and base point t0 > 0."""

    alpha: float
    rho: float = 1.0
    t0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise OrderError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise OrderError(f"rho must be positive, got {self.rho}")
        if not (math.isfinite(self.t0) and self.t0 > 0.0):
            raise OrderError(f"t0 must be positive, got {self.t0}")

    def require_unit_interval_alpha(self, what: str = "this operation") -> None:
        if not self.alpha < 1.0:
            raise OrderError(f"{what} requires alpha in (0,1), got alpha={self.alpha}")

    def w_of_t(self, t):
        """Transformed time w = (t^rho - t0^rho)/rho for t >= t0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0 * (1.0 - 1e-12)):
            raise ValueError(f"times must satisfy t >= t0 = {self.t0}")
        return (t**self.rho - self.t0**self.rho) / self.rho

    def t_of_w(self, w):
        """Physical time t = (rho*w + t0^rho)^(1/rho) for w >= 0."""
        w = np.asarray(w, dtype=float)
        return (self.rho * w + self.t0**self.rho) ** (1.0 / self.rho)


@dataclass(frozen=True)
class SampledFunction:
    """Function samples on a uniform grid in the transformed time w.

    ``grid`` starts at w_0 = 0 (i.e. t = t0) and must be uniformly spaced;
    ``values`` holds one scalar or one d-vector per node.
    """

    grid: np.ndarray
    values: np.ndarray
    first_node_extrapolated: bool = field(default=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.ndim != 1 or grid.size < 2:
            raise GridError("grid must be one-dimensional with at least 2 nodes")
        if grid[0] != 0.0:
            raise GridError(f"grid must start at w=0, got {grid[0]}")
        steps = np.diff(grid)
        h = grid[-1] / (grid.size - 1)
        if h <= 0.0 or not np.allclose(steps, h, rtol=1e-8, atol=1e-12 * max(h, 1.0)):
            raise GridError("grid spacing is not uniform in w")
        if values.shape[0] != grid.size:
            raise GridError(
                f"values ({values.shape[0]} rows) do not match grid ({grid.size} nodes)"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("values contain non-finite entries")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def n_nodes(self) -> int:
        return self.grid.size

    @classmethod
    def from_times(cls, times, values, order: FracOrder) -> "SampledFunction":
        """Build from (t, value) samples; the t's must map to a uniform w-grid."""
        w = order.w_of_t(np.asarray(times, dtype=float))
        if abs(w[0]) > 1e-12 * max(1.0, abs(w[-1])):
            raise GridError(f"first sample must sit at t0={order.t0}")
        w = w - w[0]
        return cls(grid=w, values=np.asarray(values))

    @classmethod
    def from_callable(cls, func, order: FracOrder, horizon: float, n: int) -> "SampledFunction":
        """Sample func(t) on the n+1-node uniform w-grid reaching ``horizon``."""
        w_end = float(order.w_of_t(horizon))
        grid = np.linspace(0.0, w_end, n + 1)
        t = order.t_of_w(grid)
        return cls(grid=grid, values=np.asarray([func(tk) for tk in t]))

    def times(self, order: FracOrder) -> np.ndarray:
        return order.t_of_w(self.grid)


# ---------------------------------------------------------------------------
# Product-trapezoidal machinery
# ---------------------------------------------------------------------------


def pt_weight_arrays(alpha: float, n: int):
    """Standard product-trapezoid weight pieces for kernel (w_n - s)^(alpha-1).

    Returns (a0, c): ``a0[n]`` is the j=0 weight at target node n and ``c[m]``
    the stationary weight for lag m = n - j, 1 <= j <= n-1; the j=n weight
    is 1. The quadrature is h^alpha/Gamma(alpha+2) * sum(weights * f).
    """
    ns = np.arange(n + 1, dtype=float)
    ap1 = alpha + 1.0
    a0 = np.zeros(n + 1)
    if n >= 1:
        a0[1:] = (ns[1:] - 1.0) ** ap1 - (ns[1:] - 1.0 - alpha) * ns[1:] ** alpha
    c = np.zeros(n + 1)
    if n >= 1:
        m = ns[1:]
        c[1:] = (m + 1.0) ** ap1 - 2.0 * m**ap1 + (m - 1.0) ** ap1
    return a0, c


def _pt_apply_plain(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """Plain product-trapezoid I^alpha on a uniform grid, all nodes at once."""
    n = values.shape[0] - 1
    a0, c = pt_weight_arrays(alpha, n)
    scale = h**alpha / float(gamma(alpha + 2.0).real)
    out = np.zeros_like(np.asarray(values, dtype=np.result_type(values, 1.0)))
    if n == 0:
        return out
    # middle convolution: S_n = sum_{j=1}^{n-1} c_{n-j} f_j, n = 2..n
    flat = values.reshape(values.shape[0], -1)
    res = np.zeros_like(out).reshape(values.shape[0], -1)
    if n >= 2:
        kern = c[1:n]
        for col in range(flat.shape[1]):
            conv = np.convolve(kern, flat[1:n, col])
            res[2:, col] = conv[: n - 1]
    res[1:, :] += np.outer(a0[1:], flat[0, :]) + flat[1:, :]
    return (scale * res).reshape(values.shape)


def _exact_power_integral(alpha: float, exponent: float, w: np.ndarray) -> np.ndarray:
    """Closed form I^alpha w^exponent = G(e+1)/G(e+1+alpha) w^(e+alpha)."""
    coef = float(gamma(exponent + 1.0).real) / float(gamma(exponent + 1.0 + alpha).real)
    with np.errstate(invalid="ignore"):
        out = coef * w ** (exponent + alpha)
    out[w == 0.0] = 0.0
    return out


def _starting_corrections(values: np.ndarray, grid: np.ndarray, alpha: float) -> np.ndarray:
    """Correction term making the rule exact on w^{0,1/2,1,3/2,2}.

    Solves, per target node, a small generalized-Vandermonde system for
    weights on the first few nodes; this is the classical starting-weight
    device for weakly singular convolution quadrature.
    """
    n_nodes = grid.size
    j = min(len(_CORRECTION_EXPONENTS), n_nodes)
    exps = _CORRECTION_EXPONENTS[:j]
    h = grid[-1] / (n_nodes - 1)

    # residuals of the plain rule on the basis monomials, h-power rescaled
    rhs = np.empty((j, n_nodes))
    vmat = np.empty((j, j))
    for p, g_exp in enumerate(exps):
        basis = grid**g_exp if g_exp > 0 else np.ones_like(grid)
        resid = _exact_power_integral(alpha, g_exp, grid) - _pt_apply_plain(basis, alpha, h)
        rhs[p] = resid / h**g_exp if g_exp > 0 else resid
        vmat[p] = np.arange(j, dtype=float) ** g_exp if g_exp > 0 else np.ones(j)
    omega = np.linalg.solve(vmat, rhs)  # (j, n_nodes)

    flat = np.asarray(values).reshape(n_nodes, -1)
    corr = np.einsum("jn,jc->nc", omega, flat[:j, :])
    return corr.reshape(np.asarray(values).shape)


def katugampola_integral(
    f: SampledFunction,
    order: FracOrder,
    alpha_i: float | None = None,
    corrected: bool = True,
) -> SampledFunction:
    """I^{alpha_i, rho} f on f's grid (alpha_i defaults to order.alpha).

    Any alpha_i > 0 is admitted. Accuracy for smooth-in-w data is
    O(h^min(2, 1+alpha_i)); the starting corrections additionally make
    half-power monomials exact.
    """
    alpha_i = order.alpha if alpha_i is None else float(alpha_i)
    if not (math.isfinite(alpha_i) and alpha_i > 0.0):
        raise OrderError(f"integration order must be positive, got {alpha_i}")
    result = _pt_apply_plain(f.values, alpha_i, f.h)
    if corrected:
        result = result + _starting_corrections(f.values, f.grid, alpha_i)
    return SampledFunction(grid=f.grid, values=result)


def ck_derivative(f: SampledFunction, order: FracOrder, caputo: bool = True) -> SampledFunction:
    """Caputo-Katugampola (or, with caputo=False, Katugampola) derivative.

    L1 scheme on first differences in w; the base-value subtraction of the
    Caputo form cancels in the differences, and the plain Katugampola form
    adds back f(t0) * w^(-alpha)/Gamma(1-alpha). Node 0 (one-sided there) is
    filled by linear extrapolation and flagged.
    """
    order.require_unit_interval_alpha("ck_derivative")
    alpha = order.alpha
    if f.n_nodes < 3:
        raise GridError("derivative needs at least 3 nodes")
    n = f.n_nodes - 1
    h = f.h
    values = np.asarray(f.values)
    df = np.diff(values, axis=0)

    m = np.arange(1, n + 1, dtype=float)
    b = m ** (1.0 - alpha) - (m - 1.0) ** (1.0 - alpha)
    scale = h ** (-alpha) / float(gamma(2.0 - alpha).real)

    flat = df.reshape(n, -1)
    out = np.zeros((n + 1, flat.shape[1]), dtype=np.result_type(values, 1.0))
    for col in range(flat.shape[1]):
        conv = np.convolve(b, flat[:, col])
        out[1:, col] = conv[:n]
    out *= scale

    if not caputo:
        w = f.grid[1:]
        base = values.reshape(n + 1, -1)[0, :]
        out[1:, :] += np.outer(w ** (-alpha) / float(gamma(1.0 - alpha).real), base)
    out[0, :] = 2.0 * out[1, :] - out[2, :]
    return SampledFunction(
        grid=f.grid,
        values=out.reshape(values.shape),
        first_node_extrapolated=True,
    )
