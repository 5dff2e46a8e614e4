from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import settings


class DispersionModel(BaseModel):
    """Integer pixel shift per spectral channel along x."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    shift_per_channel: int = Field(default_factory=lambda: settings.SHIFT_PER_CHANNEL)
    reference_channel: int = Field(0, ge=0)

    def shift(self, k: int) -> int:
        return (k - self.reference_channel) * self.shift_per_channel

    def shifts(self, n_channels: int) -> np.ndarray:
        return np.array([self.shift(k) for k in range(n_channels)], dtype=np.int64)

    def span(self, n_channels: int) -> int:
        """Extra mask columns needed beyond the scene width."""
        return (n_channels - 1) * abs(self.shift_per_channel)

    def origin_offset(self, n_channels: int) -> int:
        return -int(self.shifts(n_channels).max())


class CodedAperture(BaseModel):
    """
    Binary mask T over the extended x range.

    `values` has shape (height, width); column j holds extended index
    j + origin_offset, so T(e, y) = values[y, e - origin_offset].
    """
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    origin_offset: int

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, v) -> np.ndarray:
        arr = np.asarray(v)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be 0 or 1")
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        return arr

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def window(self, shift: int, nx: int) -> np.ndarray:
        """T(x - shift, y) for detector columns x = 0 .. nx-1."""
        start = -shift - self.origin_offset
        if start < 0 or start + nx > self.width:
            raise IndexError(f"shift {shift} leaves the mask extent")
        return self.values[:, start:start + nx]

    def ones_fraction(self) -> float:
        return float(self.values.mean())
