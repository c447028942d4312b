import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ckstab.config import builtin_config
from ckstab.fraccalc import FracOrder


@pytest.fixture(scope="session")
def lorenz_cfg():
    return builtin_config("lorenz")


@pytest.fixture(scope="session")
def lorenz_closed(lorenz_cfg):
    return lorenz_cfg.closed_loop()


@pytest.fixture(scope="session")
def lorenz_order():
    return FracOrder(alpha=0.9, rho=1.2, t0=1.0)


@pytest.fixture(scope="session")
def lorenz_g(lorenz_cfg):
    return lorenz_cfg.nonlinearity


def lorenz_matrix():
    return np.array([[-8.0, 8.0, 0.0], [26.0, -43.0, 0.0], [0.0, 0.0, -3.0]])
