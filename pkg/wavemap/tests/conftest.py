import os
import tempfile

import numpy as np
import pytest

# Keep the rotating log file out of the working tree
os.environ.setdefault("WAVEMAP_LOG_DIR", os.path.join(tempfile.gettempdir(), "wavemap-test-logs"))

from wavemap.core.config import COARSE_SHOOTING, ENV_PREFIX  # noqa: E402
from wavemap.spectral import odecore  # noqa: E402


@pytest.fixture
def clean_env(monkeypatch):
    """Removes WAVEMAP_* overrides (except the log dir) and pins SOURCE_DATE_EPOCH."""
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX) and not key.startswith(ENV_PREFIX + "LOG"):
            monkeypatch.delenv(key)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    return monkeypatch


@pytest.fixture
def coarse():
    return COARSE_SHOOTING


@pytest.fixture
def corrupted_pencil(monkeypatch):
    """Flips the sign of the zeroth-order pencil coefficient everywhere it is looked up."""
    original = odecore.pencil_r

    def flipped(rho, lam, x=None):
        return -original(rho, lam, x)

    monkeypatch.setattr(odecore, "pencil_r", flipped)
    return flipped


@pytest.fixture
def interior():
    return np.linspace(0.01, 0.99, 981)
