from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen_array(value, ndim: int, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


class WavelengthGrid(BaseModel):
    """Ordered band-center wavelengths in nm."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    wavelengths: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("wavelengths")
    @classmethod
    def _check_monotone(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        for w in v:
            if not math.isfinite(w) or w <= 0:
                raise ValueError(f"wavelengths must be finite and > 0, got {w}")
        for a, b in zip(v, v[1:]):
            if not b > a:
                raise ValueError("wavelengths must be strictly increasing")
        return v

    @property
    def n_channels(self) -> int:
        return len(self.wavelengths)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.wavelengths, dtype=np.float64)

    @property
    def first(self) -> float:
        return self.wavelengths[0]

    @property
    def last(self) -> float:
        return self.wavelengths[-1]

    @property
    def spacing(self) -> float:
        """Mean channel spacing (0 for a single channel)."""
        if self.n_channels == 1:
            return 0.0
        return (self.last - self.first) / (self.n_channels - 1)

    def subset(self, indices: range) -> "WavelengthGrid":
        return WavelengthGrid(wavelengths=tuple(self.wavelengths[i] for i in indices))

    def nearest_channel(self, wavelength_nm: float) -> int:
        return int(np.argmin(np.abs(self.values - wavelength_nm)))


class SpectralCube(BaseModel):
    """
    f(x, y, λ) with an attached wavelength grid.

    `data` has shape (n_lambda, ny, nx): band-major, then row-major within a
    band, so the flat index is (k * ny + y) * nx + x.
    """
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    grid: WavelengthGrid
    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def _coerce_data(cls, v) -> np.ndarray:
        return _frozen_array(v, 3, "cube data")

    @model_validator(mode="after")
    def _check_bands(self) -> "SpectralCube":
        if self.data.shape[0] != self.grid.n_channels:
            raise ValueError(
                f"cube has {self.data.shape[0]} bands but grid has {self.grid.n_channels}"
            )
        return self

    @property
    def nx(self) -> int:
        return self.data.shape[2]

    @property
    def ny(self) -> int:
        return self.data.shape[1]

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.data.shape

    def spectrum(self, x: int, y: int) -> np.ndarray:
        return self.data[:, y, x]

    def sel_bands(self, indices: range) -> "SpectralCube":
        return SpectralCube(grid=self.grid.subset(indices), data=self.data[indices.start:indices.stop])

    def clamped(self) -> "SpectralCube":
        """Copy with negative values set to zero (export-time only)."""
        return SpectralCube(grid=self.grid, data=np.maximum(self.data, 0.0))


class Measurement(BaseModel):
    """Detector image I(x, y), shape (ny, nx), plus the noise it carries."""
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray
    noise_sigma: float = Field(0.0, ge=0.0)

    @field_validator("data", mode="before")
    @classmethod
    def _coerce_data(cls, v) -> np.ndarray:
        return _frozen_array(v, 2, "measurement data")

    @property
    def nx(self) -> int:
        return self.data.shape[1]

    @property
    def ny(self) -> int:
        return self.data.shape[0]


class BandSplit(BaseModel):
    """
    Two contiguous channel ranges of a full grid: low = [0, split_index),
    high = [split_index, n_channels). A channel exactly at the boundary is high.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    boundary_nm: float
    split_index: int = Field(..., ge=0)
    n_channels: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_index(self) -> "BandSplit":
        if self.split_index > self.n_channels:
            raise ValueError("split_index beyond grid length")
        return self

    @property
    def low_indices(self) -> range:
        return range(0, self.split_index)

    @property
    def high_indices(self) -> range:
        return range(self.split_index, self.n_channels)
