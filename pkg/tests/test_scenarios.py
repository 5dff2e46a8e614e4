import json

import numpy as np
import pytest

from src.models.solver import GapTvConfig, TwistConfig
from src.services import metrics
from src.services.bands import make_wavelength_grid, split_bands
from src.services.optics import SystemOperator, add_noise
from src.services.phantoms import glyph_regions, letter_target, material_probe_points, material_scene, random_mask
from src.services.solvers import gaptv_solve, twist_solve
from src.utils.logger import setup_logger
from tests.conftest import ROOT

logger = setup_logger(__name__)


def get_test_cases():
    """Helper to generate test cases for parameterization."""
    with open(ROOT / "tested_scenarios.json", "r") as f:
        data = json.load(f)
    cases = []
    for scenario_id, scenario in data.get("scenarios", {}).items():
        marks = [pytest.mark.slow] if scenario.get("slow") else []
        cases.append(pytest.param(scenario_id, scenario, id=scenario_id, marks=marks))
    return cases


def build_grid(scenario):
    grid = make_wavelength_grid(*scenario["grid"])
    band = scenario.get("band", "full")
    if band == "full":
        return grid
    split = split_bands(grid)
    return grid.subset(split.low_indices if band == "low" else split.high_indices)


def build_scene(scenario, grid):
    nx, ny = scenario["nx"], scenario["ny"]
    phantom = scenario["phantom"]
    if phantom["kind"] == "letters":
        glyphs = [tuple(g) for g in phantom["glyphs"]]
        return letter_target(glyphs, nx, ny, grid)
    return material_scene(nx, ny, grid)


@pytest.mark.parametrize("scenario_id, scenario", get_test_cases())
def test_scenario_recovery(scenario_id, scenario):
    """
    Simulates the scenario's measurement, reconstructs it, and checks the recorded thresholds.
    """
    logger.info(f"Testing scenario: {scenario_id} - {scenario['description']}")
    nx, ny = scenario["nx"], scenario["ny"]
    grid = build_grid(scenario)
    truth = build_scene(scenario, grid)

    mask = random_mask(nx, ny, grid.n_channels, scenario["mask"]["density"], scenario["mask"]["seed"])
    op = SystemOperator(nx, ny, grid, mask)
    meas = add_noise(op.forward(truth), scenario["noise"]["sigma"], scenario["noise"]["seed"])

    solver = scenario["solver"]
    if solver["algorithm"] == "twist":
        recon, report = twist_solve(op, meas, TwistConfig(**solver["config"]))
    else:
        recon, report = gaptv_solve(op, meas, GapTvConfig(**solver["config"]))

    assert np.all(np.isfinite(recon.data))
    assert len(report.objective_trace) == report.iterations_run
    expect = scenario["expect"]

    if "relative_error_max" in expect:
        rel = np.linalg.norm(recon.data - truth.data) / np.linalg.norm(truth.data)
        assert rel <= expect["relative_error_max"]
    if "iterations_max" in expect:
        assert report.iterations_run <= expect["iterations_max"]
    if expect.get("objective_decreases"):
        assert report.final_objective < report.initial_objective
    if expect.get("residual_decreases"):
        trace = np.array(report.residual_trace)
        assert trace[-1] < trace[0]
        if not solver["config"].get("accelerate"):
            assert np.all(np.diff(trace) <= 1e-12 * trace[0])
    if "psnr_db_min" in expect:
        value = metrics.psnr(recon.clamped(), truth)
        logger.info(f"Scenario {scenario_id}: PSNR {value:.2f} dB")
        assert value >= expect["psnr_db_min"]
    if "argmax_agreement_min" in expect:
        chars = [g[0] for g in scenario["phantom"]["glyphs"]]
        for region in glyph_regions(chars, nx, ny):
            agreement = metrics.spectral_argmax_agreement(recon, truth, region)
            assert agreement >= expect["argmax_agreement_min"]
    if "correlation_min" in expect:
        for point in material_probe_points(nx, ny):
            r = metrics.spectral_correlation(recon.clamped(), truth, point)
            logger.info(f"Scenario {scenario_id}: correlation at {point} = {r:.4f}")
            assert r >= expect["correlation_min"]


def test_scenarios_are_well_formed(tested_scenarios):
    assert tested_scenarios, "no scenarios defined"
    for scenario_id, scenario in tested_scenarios.items():
        missing = {"description", "nx", "ny", "grid", "phantom", "mask", "noise", "solver", "expect"} - scenario.keys()
        assert not missing, f"{scenario_id} lacks {sorted(missing)}"
        assert scenario["solver"]["algorithm"] in ("twist", "gaptv")
