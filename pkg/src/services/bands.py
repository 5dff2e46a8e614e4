"""Wavelength grids and the two-sub-band split/stitch workflow."""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from pydantic import ValidationError

from src.config import settings
from src.models.errors import BandSplitError, DimensionError, GridError
from src.models.spectral import BandSplit, SpectralCube, WavelengthGrid
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def grid_values(lambda_min: float, lambda_max: float, n_channels: int) -> np.ndarray:
    """
    Equally spaced values including both endpoints.

    The lower half counts up from lambda_min and the upper half counts down
    from lambda_max, so the result is exactly mirror-symmetric.
    """
    if not (math.isfinite(lambda_min) and math.isfinite(lambda_max)):
        raise GridError(f"non-finite grid bounds ({lambda_min}, {lambda_max})")
    if n_channels < 1:
        raise GridError(f"n_channels must be >= 1, got {n_channels}")
    if lambda_max < lambda_min:
        raise GridError(f"lambda_max {lambda_max} < lambda_min {lambda_min}")
    if n_channels == 1:
        if lambda_max != lambda_min:
            raise GridError("a single-channel grid needs lambda_min == lambda_max")
        return np.array([float(lambda_min)])

    step = (lambda_max - lambda_min) / (n_channels - 1)
    last = n_channels - 1
    values = np.empty(n_channels, dtype=np.float64)
    for k in range(n_channels):
        if 2 * k < last:
            values[k] = lambda_min + k * step
        elif 2 * k > last:
            values[k] = lambda_max - (last - k) * step
        else:
            values[k] = 0.5 * (lambda_min + lambda_max)
    return values


def make_wavelength_grid(lambda_min: float, lambda_max: float, n_channels: int) -> WavelengthGrid:
    values = grid_values(lambda_min, lambda_max, n_channels)
    try:
        return WavelengthGrid(wavelengths=tuple(float(v) for v in values))
    except ValidationError as exc:
        raise GridError(f"invalid wavelength grid: {exc}") from exc


def parse_grid_spec(spec: str) -> WavelengthGrid:
    """Parses 'lambda_min:lambda_max:n_channels', e.g. '700:1600:52'."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise GridError(f"grid spec must look like MIN:MAX:N, got '{spec}'")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise GridError(f"unparseable grid spec '{spec}'") from exc
    return make_wavelength_grid(lo, hi, n)


def split_bands(grid: WavelengthGrid, boundary_nm: float = settings.BAND_BOUNDARY_NM) -> BandSplit:
    """Channels below the boundary go low; a channel exactly at it goes high."""
    if not math.isfinite(boundary_nm) or boundary_nm < grid.first or boundary_nm > grid.last:
        raise BandSplitError(
            f"boundary {boundary_nm} nm outside grid range [{grid.first}, {grid.last}]"
        )
    split_index = int(np.searchsorted(grid.values, boundary_nm, side="left"))
    split = BandSplit(boundary_nm=boundary_nm, split_index=split_index, n_channels=grid.n_channels)
    logger.debug(
        f"Split at {boundary_nm} nm: {len(split.low_indices)} low / {len(split.high_indices)} high"
    )
    return split


def split_cube(cube: SpectralCube, split: BandSplit) -> Tuple[SpectralCube, SpectralCube]:
    if split.n_channels != cube.n_channels:
        raise DimensionError(
            f"split covers {split.n_channels} channels, cube has {cube.n_channels}"
        )
    if not split.low_indices or not split.high_indices:
        raise BandSplitError("both sub-bands must hold at least one channel")
    return cube.sel_bands(split.low_indices), cube.sel_bands(split.high_indices)


def stitch_cubes(low: SpectralCube, high: SpectralCube) -> SpectralCube:
    """Concatenates two sub-band cubes along the spectral axis."""
    for name, cube in (("low", low), ("high", high)):
        if cube is None or cube.data.shape[0] == 0 or len(cube.grid.wavelengths) == 0:
            raise BandSplitError(f"{name} cube must hold at least one band")
    if (low.nx, low.ny) != (high.nx, high.ny):
        raise DimensionError(
            f"spatial mismatch: low is {low.nx}x{low.ny}, high is {high.nx}x{high.ny}"
        )
    if not low.grid.last < high.grid.first:
        raise BandSplitError(
            f"sub-bands overlap or are out of order: low ends at {low.grid.last} nm, "
            f"high starts at {high.grid.first} nm"
        )
    grid = WavelengthGrid(wavelengths=low.grid.wavelengths + high.grid.wavelengths)
    return SpectralCube(grid=grid, data=np.concatenate([low.data, high.data], axis=0))
