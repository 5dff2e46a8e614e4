from __future__ import annotations

from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

LightSource = Literal["led", "laser"]


class Glyph(BaseModel):
    """A letter lit by a narrow source; fwhm_nm=None picks the source default."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    char: str = Field(..., min_length=1, max_length=1)
    center_nm: float = Field(..., gt=0.0)
    fwhm_nm: Optional[float] = Field(None, ge=0.0)
    source: LightSource = "led"


class MaterialSpectrum(BaseModel):
    """Relative intensity in [0, 1] per channel of some grid."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    values: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("values")
    @classmethod
    def _check_range(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        arr = np.asarray(v, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("material spectrum values must be finite and in [0, 1]")
        return v

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)
