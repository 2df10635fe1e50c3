"""
Shared fixtures for the translator lab tests
"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from config import settings  # noqa: E402
from sl2r_core import Sl2Point  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(settings.random_seed)


@pytest.fixture
def sample_points(rng):
    """A small deterministic cloud with x in [-3, 3], y in [0.2, 3], theta in [-pi, pi]"""
    return [
        Sl2Point(float(x), float(y), float(t))
        for x, y, t in zip(rng.uniform(-3, 3, 25), rng.uniform(0.2, 3, 25), rng.uniform(-math.pi, math.pi, 25))
    ]


@pytest.fixture
def small_grid(monkeypatch):
    """Shrink default residual grids so surface-level tests stay fast"""
    monkeypatch.setattr(settings, "grid_ns", 9)
    monkeypatch.setattr(settings, "grid_nt", 5)
    return settings
