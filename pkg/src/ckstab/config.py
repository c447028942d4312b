"""System configuration: JSON schema validation, built-ins, nonlinearities.

Configurations are plain JSON validated against the shipped
``config.schema.json``. Nonlinearities are either named built-ins or
polynomial term lists (coefficient times a monomial in the coordinates);
constant terms are rejected so that f(0) = 0 holds by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from .errors import ConfigError
from .fraccalc import FracOrder

__all__ = [
    "SimulationSettings",
    "SystemConfig",
    "load_config",
    "config_from_dict",
    "builtin_config",
    "BUILTIN_SYSTEMS",
]


def _schema() -> dict:
    with resources.files("ckstab").joinpath("config.schema.json").open("r") as fh:
        return json.load(fh)


def lorenz_g(x: np.ndarray) -> np.ndarray:
    """Quadratic Lorenz coupling (0, -x1*x3, x1*x2)."""
    return np.array([0.0 * x[0], -x[0] * x[2], x[0] * x[1]])


def _zero_f(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x))


_BUILTIN_NONLINEARITIES: dict[str, Callable] = {
    "lorenz-g": lorenz_g,
    "zero": _zero_f,
}


@dataclass(frozen=True)
class SimulationSettings:
    horizon: float
    steps: int
    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))


@dataclass(frozen=True)
class SystemConfig:
    """Validated system description ready for the solvers."""

    name: str
    a: np.ndarray
    nonlinearity: Callable[[np.ndarray], np.ndarray]
    nonlinearity_spec: object
    order: FracOrder
    feedback: tuple[np.ndarray, np.ndarray] | None = None
    simulation: SimulationSettings | None = None

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def closed_loop(self) -> np.ndarray:
        """A + B K when feedback is configured, otherwise A."""
        if self.feedback is None:
            return self.a
        b, k = self.feedback
        return self.a + b @ k

    def simulation_or_default(self) -> SimulationSettings:
        if self.simulation is not None:
            return self.simulation
        return SimulationSettings(
            horizon=self.order.t0 + 50.0, steps=1024, x0=np.full(self.dim, 0.1)
        )


def _polynomial_callable(terms: list, dim: int) -> Callable:
    targets = np.array([t["target"] for t in terms], dtype=int)
    coeffs = np.array([t["coeff"] for t in terms], dtype=float)
    powers = np.array([t["powers"] for t in terms], dtype=float)

    def f(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        out = np.zeros(dim, dtype=x.dtype)
        monomials = coeffs * np.prod(x[None, :] ** powers, axis=1)
        np.add.at(out, targets, monomials)
        return out

    return f


def config_from_dict(raw: dict, source: str = "<dict>") -> SystemConfig:
    """Validate a raw mapping against the schema and build a SystemConfig."""
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: field '{path}': {exc.message}") from exc

    a = np.asarray(raw["A"], dtype=float)
    d = a.shape[0]
    if a.ndim != 2 or a.shape != (d, d):
        raise ConfigError(f"{source}: field 'A': must be square, got shape {a.shape}")

    order_raw = raw["order"]
    order = FracOrder(
        alpha=order_raw["alpha"],
        rho=order_raw.get("rho", 1.0),
        t0=order_raw.get("t0", 1.0),
    )

    nl_spec = raw["nonlinearity"]
    if isinstance(nl_spec, str):
        func = _BUILTIN_NONLINEARITIES[nl_spec]
        if nl_spec == "lorenz-g" and d != 3:
            raise ConfigError(f"{source}: field 'nonlinearity': lorenz-g needs dimension 3, got {d}")
    else:
        terms = nl_spec["terms"]
        for i, term in enumerate(terms):
            if term["target"] >= d:
                raise ConfigError(
                    f"{source}: field 'nonlinearity/terms/{i}/target': "
                    f"{term['target']} out of range for dimension {d}"
                )
            if len(term["powers"]) != d:
                raise ConfigError(
                    f"{source}: field 'nonlinearity/terms/{i}/powers': "
                    f"need {d} exponents, got {len(term['powers'])}"
                )
            if sum(term["powers"]) < 1:
                raise ConfigError(
                    f"{source}: field 'nonlinearity/terms/{i}': constant term violates f(0)=0"
                )
        func = _polynomial_callable(terms, d)

    feedback = None
    if "feedback" in raw:
        b = np.asarray(raw["feedback"]["B"], dtype=float)
        k = np.asarray(raw["feedback"]["K"], dtype=float)
        if b.ndim != 2 or k.ndim != 2 or b.shape[0] != d or k.shape[1] != d or b.shape[1] != k.shape[0]:
            raise ConfigError(
                f"{source}: field 'feedback': B {b.shape} and K {k.shape} "
                f"are not conformable with dimension {d}"
            )
        feedback = (b, k)

    simulation = None
    if "simulation" in raw:
        sim = raw["simulation"]
        horizon = sim.get("horizon", order.t0 + 50.0)
        if not horizon > order.t0:
            raise ConfigError(f"{source}: field 'simulation/horizon': must exceed t0={order.t0}")
        x0 = np.asarray(sim.get("x0", np.full(d, 0.1)), dtype=float)
        if x0.size != d:
            raise ConfigError(
                f"{source}: field 'simulation/x0': need {d} components, got {x0.size}"
            )
        simulation = SimulationSettings(horizon=horizon, steps=sim.get("steps", 1024), x0=x0)

    return SystemConfig(
        name=raw["name"],
        a=a,
        nonlinearity=func,
        nonlinearity_spec=nl_spec,
        order=order,
        feedback=feedback,
        simulation=simulation,
    )


def load_config(path) -> SystemConfig:
    """Read and validate a JSON system configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return config_from_dict(raw, source=str(path))


# Feedback-stabilized Lorenz system with parameters a=-8, b=26, c=-7, d=3
# and order alpha=0.9, rho=1.2.
_LORENZ_RAW = {
    "name": "lorenz",
    "A": [[-8.0, 8.0, 0.0], [26.0, 7.0, 0.0], [0.0, 0.0, -3.0]],
    "nonlinearity": "lorenz-g",
    "feedback": {"B": [[0.0], [1.0], [0.0]], "K": [[0.0, -50.0, 0.0]]},
    "order": {"alpha": 0.9, "rho": 1.2, "t0": 1.0},
    "simulation": {"horizon": 51.0, "steps": 1024, "x0": [0.1, 0.1, 0.1]},
}

BUILTIN_SYSTEMS = ("lorenz",)


def builtin_config(name: str) -> SystemConfig:
    """Named built-in system; currently the stabilized Lorenz benchmark."""
    if name == "lorenz":
        return config_from_dict(_LORENZ_RAW, source="builtin:lorenz")
    raise ConfigError(f"unknown built-in system '{name}' (available: {', '.join(BUILTIN_SYSTEMS)})")
