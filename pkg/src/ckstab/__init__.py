"""Caputo-Katugampola fractional operators, stability certificates, simulation.

The package splits along the pipeline:

* ``specfun``   gamma, Mittag-Leffler machinery, kernel tail constants;
* ``fraccalc``  fractional integral / derivative on sampled data;
* ``spectral``  eigenvalues, the sector stability test, modal transforms;
* ``dynamics``  closed-form linear solutions and the nonlinear solver;
* ``perron``    the Lyapunov-Perron operator and contraction certificates;
* ``config``    JSON system configurations and built-in benchmarks;
* ``cli``       the ``ckstab`` command-line tool.
"""

from .config import SimulationSettings, SystemConfig, builtin_config, config_from_dict, load_config
from .dynamics import DIVERGENCE_CAP, Trajectory, make_grid, simulate, solve_linear_scalar
from .errors import (
    BoundaryInconclusiveError,
    CkstabError,
    ConfigError,
    DefectiveMatrixError,
    EigenvalueConvergenceError,
    GridError,
    MLConvergenceError,
    OrderError,
    PoleError,
    SectorConditionError,
    UnstableSpectrumError,
)
from .fraccalc import FracOrder, SampledFunction, ck_derivative, katugampola_integral
from .perron import (
    ContractionCertificate,
    certify,
    estimate_C,
    estimate_supE,
    local_lipschitz,
    lp_apply,
    picard_iterate,
)
from .specfun import (
    BoundConstants,
    MLInfo,
    MLParams,
    gamma,
    mittag_leffler,
    ml_kernel,
    principal_arg,
    tail_constants,
)
from .spectral import JordanHint, ModalSystem, SpectralReport, eigenvalues, modal_transform, sector_check

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "BoundaryInconclusiveError",
    "CkstabError",
    "ConfigError",
    "ContractionCertificate",
    "DIVERGENCE_CAP",
    "DefectiveMatrixError",
    "EigenvalueConvergenceError",
    "FracOrder",
    "GridError",
    "JordanHint",
    "MLConvergenceError",
    "MLInfo",
    "MLParams",
    "ModalSystem",
    "OrderError",
    "PoleError",
    "SampledFunction",
    "SectorConditionError",
    "SimulationSettings",
    "SpectralReport",
    "SystemConfig",
    "Trajectory",
    "UnstableSpectrumError",
    "builtin_config",
    "certify",
    "ck_derivative",
    "config_from_dict",
    "eigenvalues",
    "estimate_C",
    "estimate_supE",
    "gamma",
    "katugampola_integral",
    "load_config",
    "local_lipschitz",
    "lp_apply",
    "make_grid",
    "mittag_leffler",
    "ml_kernel",
    "modal_transform",
    "picard_iterate",
    "principal_arg",
    "sector_check",
    "simulate",
    "solve_linear_scalar",
    "tail_constants",
    "__version__",
]
