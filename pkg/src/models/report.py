from __future__ import annotations

import math
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer


class PointCorrelation(BaseModel):
    """Spectral correlation at one probe point, or why it is undefined."""
    model_config = ConfigDict(extra="forbid")

    x: int
    y: int
    r: Optional[float] = None
    error: Optional[str] = None


class MetricsSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    psnr_db: Optional[float] = None
    correlations: List[PointCorrelation] = Field(default_factory=list)

    @field_serializer("psnr_db")
    def _serialize_psnr(self, v: Optional[float]) -> Union[float, str, None]:
        if v is not None and math.isinf(v):
            return "Infinity"
        return v


class RunReport(BaseModel):
    """
    JSON run report. Field names are stable; only wall_time_s varies between
    identical reruns.
    """
    model_config = ConfigDict(extra="forbid")

    command: str
    algorithm: Optional[str] = None
    objective_trace: List[float] = Field(default_factory=list)
    residual_trace: List[float] = Field(default_factory=list)
    iterations_run: int = 0
    stop_reason: Optional[str] = None
    wall_time_s: float = 0.0
    noise_sigma: Optional[float] = None
    metrics: MetricsSummary = Field(default_factory=MetricsSummary)
    config: Dict[str, Any] = Field(default_factory=dict)
    seeds: Dict[str, int] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    runs: List["RunReport"] = Field(default_factory=list)


RunReport.model_rebuild()
