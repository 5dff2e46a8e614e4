import json
from pathlib import Path

import numpy as np
import pytest

from src.models.aperture import CodedAperture, DispersionModel
from src.services.bands import make_wavelength_grid
from src.services.optics import SystemOperator
from src.services.phantoms import random_mask

ROOT = Path(__file__).resolve().parent.parent


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end recoveries that take tens of seconds")


@pytest.fixture(scope="session")
def tested_scenarios():
    """Fixture to load tested_scenarios.json."""
    scenario_path = ROOT / "tested_scenarios.json"
    if not scenario_path.exists():
        pytest.fail("tested_scenarios.json not found in root directory.")

    with open(scenario_path, "r") as f:
        data = json.load(f)
    return data.get("scenarios", {})


@pytest.fixture
def make_operator():
    """Factory for random small operators: make_operator(nx, ny, n, density=0.5, seed=0, dispersion=None)."""

    def _make(nx, ny, n_channels, density=0.5, seed=0, dispersion=None):
        dispersion = dispersion or DispersionModel(shift_per_channel=1)
        grid = make_wavelength_grid(700.0, 700.0 + 10.0 * (n_channels - 1), n_channels)
        mask = random_mask(nx, ny, n_channels, density, seed, dispersion)
        return SystemOperator(nx, ny, grid, mask, dispersion)

    return _make


@pytest.fixture
def tiny_operator():
    """The 2x1x2 system with extended mask [1, 0, 1] over x = -1..1."""
    mask = CodedAperture(values=np.array([[1, 0, 1]]), origin_offset=-1)
    grid = make_wavelength_grid(700.0, 800.0, 2)
    return SystemOperator(2, 1, grid, mask, DispersionModel(shift_per_channel=1))
