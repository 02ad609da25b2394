import numpy as np
import pytest

from ..config import get_settings
from ..funcs.base import FunctionHandle
from ..linops.operator import LinearMap
from ..solvers.base import CompositeProblem


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch, tmp_path):
    """No log file, and outputs under tmp_path"""
    settings = get_settings()
    monkeypatch.setattr(settings, "LOG_FILE", "")
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "results"))
    yield settings


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scalar_pd_problem():
    """f = x^2/2, g = 0, h = y^2/2 (so h* = y^2/2), K = 1"""
    f = FunctionHandle.quadratic(np.eye(1), np.zeros(1))
    g = FunctionHandle.zero(1)
    h = FunctionHandle.scaled_sq_norm(1.0, dim=1)
    return CompositeProblem(f=f, g=g, h=h, K=LinearMap.identity(1))


@pytest.fixture
def scalar_two_problem():
    """f = x^2/2, g = 0"""
    return CompositeProblem(f=FunctionHandle.quadratic(np.eye(1), np.zeros(1)), g=FunctionHandle.zero(1))
