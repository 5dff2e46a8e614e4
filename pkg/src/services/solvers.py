"""
Reconstruction of a spectral cube from one coded measurement.

Both solvers minimize 1/2 ||I - Hf||^2 + tau * TV(f), where TV is the
isotropic 2-D total variation summed over bands.
"""
from __future__ import annotations

import time
from typing import Optional, Tuple

import numpy as np

from src.config import settings
from src.models.errors import DimensionError
from src.models.solver import GapTvConfig, SolveReport, TwistConfig
from src.models.spectral import Measurement, SpectralCube
from src.services.optics import SystemOperator
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# Chambolle's dual step; 1/4 is the usual practical bound for 2-D grids.
CHAMBOLLE_STEP = 0.25


def gradient(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Forward differences along x and y, zero at the far edges."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[..., :, :-1] = u[..., :, 1:] - u[..., :, :-1]
    gy[..., :-1, :] = u[..., 1:, :] - u[..., :-1, :]
    return gx, gy


def divergence(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Negative adjoint of `gradient`."""
    # single-row or single-column images have no differences along that axis
    out = np.zeros_like(px)
    if px.shape[-1] > 1:
        out[..., :, 0] = px[..., :, 0]
        out[..., :, 1:-1] = px[..., :, 1:-1] - px[..., :, :-2]
        out[..., :, -1] = -px[..., :, -2]
    if py.shape[-2] > 1:
        out[..., 0, :] += py[..., 0, :]
        out[..., 1:-1, :] += py[..., 1:-1, :] - py[..., :-2, :]
        out[..., -1, :] -= py[..., -2, :]
    return out


def total_variation(u: np.ndarray) -> float:
    """Isotropic TV summed over all leading axes (bands)."""
    gx, gy = gradient(u)
    return float(np.sqrt(gx * gx + gy * gy).sum())


def tv_denoise(band: np.ndarray, weight: float, inner_iters: int = settings.TV_INNER_ITERS) -> np.ndarray:
    """
    Chambolle's dual projection for argmin_u 1/2 ||u - band||^2 + weight * TV(u).

    Operates on the last two axes, so a (n_lambda, ny, nx) stack is denoised
    band by band in one call. Starts from a zero dual field and runs exactly
    `inner_iters` iterations.
    """
    if weight < 0:
        raise ValueError(f"TV weight must be >= 0, got {weight}")
    band = np.asarray(band, dtype=np.float64)
    if weight == 0:
        return band.copy()

    px = np.zeros_like(band)
    py = np.zeros_like(band)
    scaled = band / weight
    for _ in range(inner_iters):
        gx, gy = gradient(divergence(px, py) - scaled)
        norm = np.sqrt(gx * gx + gy * gy)
        denom = 1.0 + CHAMBOLLE_STEP * norm
        px = (px + CHAMBOLLE_STEP * gx) / denom
        py = (py + CHAMBOLLE_STEP * gy) / denom
    return band - weight * divergence(px, py)


def _check_dims(op: SystemOperator, meas: Measurement) -> None:
    if meas.data.shape != op.meas_shape:
        raise DimensionError(
            f"measurement shape {meas.data.shape} != detector shape {op.meas_shape}"
        )


def _objective(op: SystemOperator, meas: np.ndarray, f: np.ndarray, tau: float) -> float:
    residual = meas - op.apply(f)
    value = 0.5 * float(np.sum(residual * residual))
    if tau:
        value += tau * total_variation(f)
    return value


def objective(op: SystemOperator, meas: Measurement, f: SpectralCube, tau: float) -> float:
    """1/2 ||I - Hf||^2 + tau * TV(f)."""
    _check_dims(op, meas)
    if f.shape != op.cube_shape:
        raise DimensionError(f"cube shape {f.shape} != operator shape {op.cube_shape}")
    return _objective(op, meas.data, f.data, tau)


def default_tau(op: SystemOperator, meas: Measurement) -> float:
    """TAU_SCALE * max|H^T I|."""
    return settings.TAU_SCALE * float(np.max(np.abs(op.apply_adjoint(meas.data))))


def _relative_change(previous: float, current: float) -> float:
    if previous == 0:
        return 0.0 if current == 0 else float("inf")
    return abs(current - previous) / abs(previous)


def twist_solve(
    op: SystemOperator,
    meas: Measurement,
    cfg: Optional[TwistConfig] = None,
) -> Tuple[SpectralCube, SolveReport]:
    """
    Two-step iterative shrinkage/thresholding:

        f1      = Gamma(f0),  f0 = H^T I
        f_{t+1} = (1 - alpha) f_{t-1} + (alpha - beta) f_t + beta Gamma(f_t)
        Gamma(f) = Psi(f + H^T (I - H f))

    with Psi the per-band TV denoiser of strength tau. With normalize_step the
    gradient step and tau are divided by L = ||H||^2, i.e. the same recursion on
    the rescaled problem (H / sqrt(L), I / sqrt(L)).
    """
    cfg = cfg or TwistConfig()
    _check_dims(op, meas)
    start = time.perf_counter()

    y = meas.data
    tau = cfg.tau if cfg.tau is not None else default_tau(op, meas)
    lipschitz = op.norm_sq() if cfg.normalize_step else 1.0
    if lipschitz == 0:
        lipschitz = 1.0
    step = 1.0 / lipschitz
    psi_weight = tau * step

    def gamma(f: np.ndarray) -> np.ndarray:
        return tv_denoise(f + step * op.apply_adjoint(y - op.apply(f)), psi_weight, cfg.tv_inner_iters)

    config_echo = cfg.model_dump()
    config_echo["tau"] = tau
    logger.info(
        f"TwIST start: {op!r}, tau={tau:.6g}, alpha={cfg.alpha}, beta={cfg.beta}, "
        f"L={lipschitz:g}, max_iters={cfg.max_iters}"
    )

    f_prev = op.apply_adjoint(y)
    initial = _objective(op, y, f_prev, tau)
    f_curr = gamma(f_prev)
    previous_obj = initial

    trace, residuals = [], []
    stop_reason = "max_iters"
    latest = f_prev
    for it in range(1, cfg.max_iters + 1):
        if it > 1:
            ist_step = gamma(f_curr)
            candidate = (1 - cfg.alpha) * f_prev + (cfg.alpha - cfg.beta) * f_curr + cfg.beta * ist_step
            if cfg.monotone and _objective(op, y, candidate, tau) > previous_obj:
                candidate = ist_step
            f_prev, f_curr = f_curr, candidate

        if not np.all(np.isfinite(f_curr)):
            logger.warning(f"TwIST diverged at iteration {it}; returning last finite iterate")
            stop_reason = "diverged"
            break

        residual = y - op.apply(f_curr)
        obj = 0.5 * float(np.sum(residual * residual)) + (tau * total_variation(f_curr) if tau else 0.0)
        trace.append(obj)
        residuals.append(float(np.linalg.norm(residual)))
        latest = f_curr
        logger.debug(f"TwIST iter {it}: objective={obj:.10g}")

        if _relative_change(previous_obj, obj) < cfg.rel_obj_tol:
            stop_reason = "tolerance"
            break
        previous_obj = obj

    wall = time.perf_counter() - start
    report = SolveReport(
        algorithm="twist",
        objective_trace=trace,
        residual_trace=residuals,
        initial_objective=initial,
        iterations_run=len(trace),
        stop_reason=stop_reason,
        wall_time=wall,
        config=config_echo,
    )
    logger.info(
        f"TwIST done: {report.iterations_run} iterations, stop={stop_reason}, "
        f"objective {initial:.6g} -> {report.final_objective:.6g}, {wall:.2f}s"
    )
    return SpectralCube(grid=op.grid, data=latest), report


def gaptv_solve(
    op: SystemOperator,
    meas: Measurement,
    cfg: Optional[GapTvConfig] = None,
) -> Tuple[SpectralCube, SolveReport]:
    """
    Generalized alternating projection with a per-band TV denoiser.

    Each iteration projects onto {f : Hf = I} using the diagonal of H H^T
    (pixels no shifted mask reaches are left alone) and then denoises:

        f <- Psi(f + H^T ((I - H f) / diag(H H^T)))

    With `accelerate` the measurement is replaced by an accumulator
    y <- y + (I - H f) before the projection.
    """
    cfg = cfg or GapTvConfig()
    _check_dims(op, meas)
    start = time.perf_counter()

    y = meas.data
    weights = op.diag_hht()
    informative = weights > 0
    inv_weights = np.zeros_like(weights)
    inv_weights[informative] = 1.0 / weights[informative]
    config_echo = cfg.model_dump()

    if not informative.any():
        logger.warning("GAP-TV: every detector pixel has zero weight; system is degenerate")
        f = op.apply_adjoint(np.zeros_like(y))
        report = SolveReport(
            algorithm="gaptv",
            initial_objective=_objective(op, y, f, cfg.tv_weight),
            iterations_run=0,
            stop_reason="degenerate",
            wall_time=time.perf_counter() - start,
            degenerate=True,
            config=config_echo,
        )
        return SpectralCube(grid=op.grid, data=f), report

    logger.info(
        f"GAP-TV start: {op!r}, tv_weight={cfg.tv_weight}, max_iters={cfg.max_iters}, "
        f"accelerate={cfg.accelerate}"
    )
    f = op.apply_adjoint(y * inv_weights)
    initial = _objective(op, y, f, cfg.tv_weight)
    accumulator = y.copy()

    trace, residuals = [], []
    stop_reason = "max_iters"
    for it in range(1, cfg.max_iters + 1):
        hf = op.apply(f)
        if cfg.accelerate:
            accumulator = accumulator + (y - hf)
            target = accumulator
        else:
            target = y
        projected = f + op.apply_adjoint((target - hf) * inv_weights)
        f_next = tv_denoise(projected, cfg.tv_weight, cfg.tv_inner_iters)

        if not np.all(np.isfinite(f_next)):
            logger.warning(f"GAP-TV diverged at iteration {it}; returning last finite iterate")
            stop_reason = "diverged"
            break
        f = f_next

        residual = y - op.apply(f)
        obj = 0.5 * float(np.sum(residual * residual)) + (
            cfg.tv_weight * total_variation(f) if cfg.tv_weight else 0.0
        )
        trace.append(obj)
        residuals.append(float(np.linalg.norm(residual)))
        logger.debug(f"GAP-TV iter {it}: objective={obj:.10g}, residual={residuals[-1]:.6g}")

    wall = time.perf_counter() - start
    report = SolveReport(
        algorithm="gaptv",
        objective_trace=trace,
        residual_trace=residuals,
        initial_objective=initial,
        iterations_run=len(trace),
        stop_reason=stop_reason,
        wall_time=wall,
        config=config_echo,
    )
    logger.info(
        f"GAP-TV done: {report.iterations_run} iterations, stop={stop_reason}, "
        f"residual {residuals[0] if residuals else float('nan'):.6g} -> "
        f"{residuals[-1] if residuals else float('nan'):.6g}, {wall:.2f}s"
    )
    return SpectralCube(grid=op.grid, data=f), report
