"""
Reflective dual-dispersion CASSI measurement model.

The two prism passes cancel the spatial shear, so each spectral band k is
modulated by the mask shifted by alpha_k = (k - ref) * s pixels along x and
the detector integrates over bands:

    I(x, y) = sum_k f(x, y, k) * T(x - alpha_k, y)
"""
from __future__ import annotations

from functools import cached_property
from typing import Optional

import numpy as np

from src.config import settings
from src.models.aperture import CodedAperture, DispersionModel
from src.models.errors import DimensionError, OracleSizeError, ParameterError
from src.models.spectral import Measurement, SpectralCube, WavelengthGrid
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def required_mask_width(nx: int, n_channels: int, dispersion: DispersionModel) -> int:
    return nx + dispersion.span(n_channels)


class SystemOperator:
    """
    The measurement map H and its adjoint, applied without building a matrix.
    """

    def __init__(
        self,
        nx: int,
        ny: int,
        grid: WavelengthGrid,
        mask: CodedAperture,
        dispersion: Optional[DispersionModel] = None,
    ):
        self.nx = nx
        self.ny = ny
        self.grid = grid
        self.mask = mask
        self.dispersion = dispersion or DispersionModel()
        self._validate()

    @classmethod
    def from_mask(
        cls,
        mask: CodedAperture,
        grid: WavelengthGrid,
        dispersion: Optional[DispersionModel] = None,
    ) -> "SystemOperator":
        """Infers the scene size from an extended mask and a grid."""
        dispersion = dispersion or DispersionModel()
        nx = mask.width - dispersion.span(grid.n_channels)
        if nx < 1:
            raise DimensionError(
                f"mask width {mask.width} too small for {grid.n_channels} channels"
            )
        return cls(nx, mask.height, grid, mask, dispersion)

    def _validate(self) -> None:
        n = self.grid.n_channels
        if self.nx < 1 or self.ny < 1:
            raise DimensionError(f"scene must be at least 1x1, got {self.nx}x{self.ny}")
        if self.dispersion.reference_channel >= n:
            raise DimensionError(
                f"reference channel {self.dispersion.reference_channel} outside {n} channels"
            )
        expected_width = required_mask_width(self.nx, n, self.dispersion)
        if self.mask.width != expected_width or self.mask.height != self.ny:
            raise DimensionError(
                f"mask is {self.mask.width}x{self.mask.height}, operator needs "
                f"{expected_width}x{self.ny}"
            )
        expected_offset = self.dispersion.origin_offset(n)
        if self.mask.origin_offset != expected_offset:
            raise DimensionError(
                f"mask origin offset {self.mask.origin_offset}, operator needs {expected_offset}"
            )

    @property
    def n_channels(self) -> int:
        return self.grid.n_channels

    @property
    def cube_shape(self) -> tuple:
        return (self.n_channels, self.ny, self.nx)

    @property
    def meas_shape(self) -> tuple:
        return (self.ny, self.nx)

    @cached_property
    def shifted_masks(self) -> np.ndarray:
        """T(x - alpha_k, y) stacked as (n_channels, ny, nx) float64."""
        shifts = self.dispersion.shifts(self.n_channels)
        stack = np.stack([self.mask.window(int(s), self.nx) for s in shifts])
        stack = stack.astype(np.float64)
        stack.setflags(write=False)
        return stack

    # Array-level kernels used by the solvers

    def apply(self, f: np.ndarray) -> np.ndarray:
        out = np.zeros(self.meas_shape, dtype=np.float64)
        masks = self.shifted_masks
        for k in range(self.n_channels):
            out += f[k] * masks[k]
        return out

    def apply_adjoint(self, g: np.ndarray) -> np.ndarray:
        return g[np.newaxis, :, :] * self.shifted_masks

    # Domain-level operations

    def _check_cube(self, cube: SpectralCube) -> None:
        if cube.shape != self.cube_shape:
            raise DimensionError(f"cube shape {cube.shape} != operator shape {self.cube_shape}")

    def _check_meas(self, meas: Measurement) -> None:
        if meas.data.shape != self.meas_shape:
            raise DimensionError(
                f"measurement shape {meas.data.shape} != detector shape {self.meas_shape}"
            )

    def forward(self, cube: SpectralCube) -> Measurement:
        self._check_cube(cube)
        return Measurement(data=self.apply(cube.data), noise_sigma=0.0)

    def adjoint(self, meas: Measurement) -> SpectralCube:
        self._check_meas(meas)
        return SpectralCube(grid=self.grid, data=self.apply_adjoint(meas.data))

    def diag_hht(self) -> np.ndarray:
        """Diagonal of H H^T: how many shifted masks are open at each pixel."""
        return self.shifted_masks.sum(axis=0)

    def norm_sq(self) -> float:
        """||H||^2; exact because H H^T is diagonal for a binary mask."""
        return float(self.diag_hht().max())

    def build_explicit_matrix(self, max_entries: int = settings.DENSE_ORACLE_MAX_ENTRIES) -> np.ndarray:
        """
        Dense H with rows in detector order (y * nx + x) and columns in cube
        order ((k * ny + y) * nx + x). Test oracle only.
        """
        rows = self.nx * self.ny
        cols = rows * self.n_channels
        if rows * cols > max_entries:
            raise OracleSizeError(
                f"dense matrix {rows}x{cols} exceeds cap of {max_entries} entries"
            )
        matrix = np.zeros((rows, cols), dtype=np.float64)
        shifts = self.dispersion.shifts(self.n_channels)
        values = self.mask.values
        for k in range(self.n_channels):
            for y in range(self.ny):
                for x in range(self.nx):
                    column = x - int(shifts[k]) - self.mask.origin_offset
                    matrix[y * self.nx + x, (k * self.ny + y) * self.nx + x] = values[y, column]
        return matrix

    def __repr__(self) -> str:
        return (
            f"SystemOperator(nx={self.nx}, ny={self.ny}, n_channels={self.n_channels}, "
            f"shift={self.dispersion.shift_per_channel})"
        )


def forward(op: SystemOperator, cube: SpectralCube) -> Measurement:
    return op.forward(cube)


def adjoint(op: SystemOperator, meas: Measurement) -> SpectralCube:
    return op.adjoint(meas)


def build_explicit_matrix(op: SystemOperator, max_entries: int = settings.DENSE_ORACLE_MAX_ENTRIES) -> np.ndarray:
    return op.build_explicit_matrix(max_entries)


def diag_HHt(op: SystemOperator) -> np.ndarray:
    return op.diag_hht()


def add_noise(meas: Measurement, sigma: float, seed: int) -> Measurement:
    """
    Adds white Gaussian noise with standard deviation sigma * max|meas|.

    sigma is a fraction of the peak signal; the absolute standard deviation
    is recorded on the returned measurement.
    """
    if not sigma >= 0:
        raise ParameterError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return Measurement(data=meas.data, noise_sigma=meas.noise_sigma)

    std = sigma * float(np.max(np.abs(meas.data)))
    rng = np.random.default_rng(seed)
    noisy = meas.data + rng.normal(0.0, std, size=meas.data.shape)
    logger.info(f"Added Gaussian noise: sigma={sigma} of peak, std={std:.6g}, seed={seed}")
    return Measurement(data=noisy, noise_sigma=std)
