"""Reconstruction quality against a known ground truth."""
from __future__ import annotations

import math
from typing import List, Sequence, Tuple

import numpy as np

from src.models.errors import DimensionError, MetricError
from src.models.report import PointCorrelation
from src.models.spectral import SpectralCube

Point = Tuple[int, int]


def _check_same_dims(recon: SpectralCube, truth: SpectralCube) -> None:
    if recon.shape != truth.shape:
        raise DimensionError(f"recon shape {recon.shape} != truth shape {truth.shape}")


def _check_point(cube: SpectralCube, point: Point) -> None:
    x, y = point
    if not (0 <= x < cube.nx and 0 <= y < cube.ny):
        raise DimensionError(f"point ({x}, {y}) outside {cube.nx}x{cube.ny} canvas")


def pearson_r(a: np.ndarray, b: np.ndarray) -> float:
    # centering a constant leaves rounding residue, so flat spectra are caught first
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise MetricError("correlation undefined for a zero-variance spectrum")
    a_c = a - a.mean()
    b_c = b - b.mean()
    denom = math.sqrt(float(np.dot(a_c, a_c)) * float(np.dot(b_c, b_c)))
    if denom == 0:
        raise MetricError("correlation undefined for a zero-variance spectrum")
    return float(np.clip(np.dot(a_c, b_c) / denom, -1.0, 1.0))


def spectral_correlation(recon: SpectralCube, truth: SpectralCube, point: Point) -> float:
    """Pearson correlation of the two spectra at one pixel."""
    _check_same_dims(recon, truth)
    _check_point(truth, point)
    x, y = point
    try:
        return pearson_r(recon.spectrum(x, y), truth.spectrum(x, y))
    except MetricError as exc:
        raise MetricError(f"at point ({x}, {y}): {exc}") from exc


def mean_spectral_correlation(recon: SpectralCube, truth: SpectralCube, points: Sequence[Point]) -> float:
    if not points:
        raise MetricError("no probe points given")
    return float(np.mean([spectral_correlation(recon, truth, p) for p in points]))


def correlations_at(recon: SpectralCube, truth: SpectralCube, points: Sequence[Point]) -> List[PointCorrelation]:
    """Per-point correlations; undefined points carry an error entry instead of raising."""
    _check_same_dims(recon, truth)
    results = []
    for x, y in points:
        try:
            results.append(PointCorrelation(x=x, y=y, r=spectral_correlation(recon, truth, (x, y))))
        except MetricError as exc:
            results.append(PointCorrelation(x=x, y=y, error=str(exc)))
    return results


def psnr(recon: SpectralCube, truth: SpectralCube) -> float:
    """10 log10(peak^2 / MSE) with peak = max(truth); +inf when MSE is 0."""
    _check_same_dims(recon, truth)
    if not np.any(truth.data):
        raise MetricError("PSNR undefined for an all-zero ground truth")
    mse = float(np.mean((recon.data - truth.data) ** 2))
    if mse == 0:
        return math.inf
    peak = float(truth.data.max())
    return 10.0 * math.log10(peak * peak / mse)


def peak_wavelength(cube: SpectralCube, point: Point) -> float:
    """Wavelength of the strongest channel at a pixel."""
    _check_point(cube, point)
    x, y = point
    return cube.grid.wavelengths[int(np.argmax(cube.spectrum(x, y)))]


def spectral_argmax_agreement(recon: SpectralCube, truth: SpectralCube, region: np.ndarray) -> float:
    """Fraction of region pixels whose spectral argmax matches the truth's."""
    _check_same_dims(recon, truth)
    if region.shape != (truth.ny, truth.nx):
        raise DimensionError(f"region shape {region.shape} != canvas {(truth.ny, truth.nx)}")
    if not region.any():
        raise MetricError("empty region")
    match = np.argmax(recon.data, axis=0) == np.argmax(truth.data, axis=0)
    return float(match[region].mean())
