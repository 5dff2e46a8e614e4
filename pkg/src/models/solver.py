from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings

StopReason = Literal["max_iters", "tolerance", "diverged", "degenerate"]
Algorithm = Literal["twist", "gaptv"]


class TwistConfig(BaseModel):
    """Parameters of the two-step iterative shrinkage/thresholding solver."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    tau: Optional[float] = Field(
        None, ge=0.0,
        description="Regularization weight; None means TAU_SCALE * max|H^T I|",
    )
    alpha: float = Field(default_factory=lambda: settings.TWIST_ALPHA, gt=0.0, lt=2.0)
    beta: float = Field(default_factory=lambda: settings.TWIST_BETA, gt=0.0)
    max_iters: int = Field(default_factory=lambda: settings.MAX_ITERS, ge=1)
    rel_obj_tol: float = Field(default_factory=lambda: settings.REL_OBJ_TOL, ge=0.0)
    tv_inner_iters: int = Field(default_factory=lambda: settings.TV_INNER_ITERS, ge=1)
    normalize_step: bool = Field(
        True, description="Divide the gradient step and tau by ||H||^2"
    )
    monotone: bool = Field(
        False, description="Fall back to the plain IST step when the objective rises"
    )


class GapTvConfig(BaseModel):
    """Parameters of generalized alternating projection with a TV denoiser."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    tv_weight: float = Field(default_factory=lambda: settings.GAPTV_WEIGHT, ge=0.0)
    max_iters: int = Field(default_factory=lambda: settings.MAX_ITERS, ge=1)
    tv_inner_iters: int = Field(default_factory=lambda: settings.TV_INNER_ITERS, ge=1)
    accelerate: bool = False


class SolveReport(BaseModel):
    """Trace and bookkeeping of one solver run."""
    model_config = ConfigDict(extra="forbid")

    algorithm: Algorithm
    objective_trace: List[float] = Field(default_factory=list)
    residual_trace: List[float] = Field(default_factory=list)
    initial_objective: float
    iterations_run: int = Field(..., ge=0)
    stop_reason: StopReason
    wall_time: float = Field(..., ge=0.0)
    degenerate: bool = False
    config: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_trace(self) -> "SolveReport":
        if len(self.objective_trace) != self.iterations_run:
            raise ValueError("objective_trace length must equal iterations_run")
        return self

    @property
    def final_objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else self.initial_objective
