"""
Command-line pipeline: phantom -> mask -> simulate -> reconstruct -> evaluate,
run once per sub-band and joined with `stitch`.

    python -m src.cli <subcommand> [flags]

Exit codes: 0 success, 2 usage error, 1 runtime or data error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.config import settings
from src.models.aperture import DispersionModel
from src.models.errors import GridError, SpectralToolkitError
from src.models.report import MetricsSummary, RunReport
from src.models.scene import Glyph
from src.models.solver import GapTvConfig, SolveReport, TwistConfig
from src.models.spectral import Measurement, WavelengthGrid
from src.services import bands, metrics, optics, phantoms, solvers, storage
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


# Argument parsing helpers

def _grid_arg(value: str) -> WavelengthGrid:
    try:
        return bands.parse_grid_spec(value)
    except GridError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_glyph(value: str) -> Glyph:
    """CHAR@CENTER_NM[:FWHM_NM | :laser | :led], e.g. 'U@850' or 'b@1550:laser'."""
    try:
        char, rest = value.split("@", 1)
        center, _, extra = rest.partition(":")
        if extra in ("laser", "led"):
            return Glyph(char=char, center_nm=float(center), source=extra)
        fwhm = float(extra) if extra else None
        return Glyph(char=char, center_nm=float(center), fwhm_nm=fwhm)
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(f"invalid glyph '{value}': expected CHAR@CENTER[:FWHM]") from exc


def parse_points(value: str) -> List[Tuple[int, int]]:
    """'x,y;x,y' -> [(x, y), ...]."""
    points = []
    try:
        for item in value.split(";"):
            if not item.strip():
                continue
            x, y = item.split(",")
            points.append((int(x), int(y)))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid point list '{value}': expected x,y[;x,y...]") from exc
    if not points:
        raise argparse.ArgumentTypeError("point list is empty")
    return points


def format_points(points: Sequence[Tuple[int, int]]) -> str:
    return ";".join(f"{x},{y}" for x, y in points)


def select_band(grid: WavelengthGrid, band: str, boundary_nm: float) -> WavelengthGrid:
    """The full grid, or the channels of one sub-band of it."""
    if band == "full":
        return grid
    split = bands.split_bands(grid, boundary_nm)
    indices = split.low_indices if band == "low" else split.high_indices
    if not indices:
        raise GridError(f"sub-band '{band}' of the grid is empty at boundary {boundary_nm} nm")
    return grid.subset(indices)


def _add_band_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band", choices=["full", "low", "high"], default="full", help="Sub-band of --grid to use")
    p.add_argument("--boundary", type=float, default=settings.BAND_BOUNDARY_NM, help="Sub-band boundary (nm)")


def _density_arg(value: str) -> float:
    density = float(value)
    if not 0.0 <= density <= 1.0:
        raise argparse.ArgumentTypeError(f"density must be in [0, 1], got {density}")
    return density


def _set_only(**kwargs: Any) -> Dict[str, Any]:
    return {k: v for k, v in kwargs.items() if v is not None}


def _report_from_solve(command: str, report: SolveReport, extra_config: Dict[str, Any]) -> RunReport:
    return RunReport(
        command=command,
        algorithm=report.algorithm,
        objective_trace=report.objective_trace,
        residual_trace=report.residual_trace,
        iterations_run=report.iterations_run,
        stop_reason=report.stop_reason,
        wall_time_s=report.wall_time,
        config={**report.config, **extra_config},
        warnings=["degenerate system: no detector pixel is reached by the mask"] if report.degenerate else [],
    )


def _operator_for(meas: Measurement, args: argparse.Namespace) -> optics.SystemOperator:
    mask = storage.read_mask(args.mask)
    dispersion = DispersionModel(shift_per_channel=args.shift)
    return optics.SystemOperator(meas.nx, meas.ny, select_band(args.grid, args.band, args.boundary), mask, dispersion)


def _solve(op: optics.SystemOperator, meas: Measurement, algo: str, args: argparse.Namespace):
    if algo == "twist":
        cfg = TwistConfig(**_set_only(
            tau=args.tau, alpha=args.alpha, beta=args.beta, max_iters=args.iters,
            rel_obj_tol=args.tol, tv_inner_iters=args.tv_iters, monotone=args.monotone or None,
        ))
        return solvers.twist_solve(op, meas, cfg)
    cfg = GapTvConfig(**_set_only(
        tv_weight=args.tv_weight, max_iters=args.iters, tv_inner_iters=args.tv_iters,
        accelerate=args.accelerate or None,
    ))
    return solvers.gaptv_solve(op, meas, cfg)


# Subcommands

def cmd_phantom(args: argparse.Namespace) -> int:
    grid = select_band(args.grid, args.band, args.boundary)
    if args.kind == "letters":
        cube = phantoms.letter_target(args.glyph or [], args.nx, args.ny, grid)
    else:
        spec_a = phantoms.builtin_material(args.material_a, grid)
        spec_b = phantoms.builtin_material(args.material_b, grid)
        cube = phantoms.material_scene(args.nx, args.ny, grid, spec_a, spec_b)
    storage.write_cube(cube, args.out)
    return 0


def cmd_mask(args: argparse.Namespace) -> int:
    mask = phantoms.random_mask(
        args.nx, args.ny, args.nlam, args.density, args.seed,
        DispersionModel(shift_per_channel=args.shift),
    )
    storage.write_mask(mask, args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    scene = storage.read_cube(args.scene)
    mask = storage.read_mask(args.mask)
    op = optics.SystemOperator(scene.nx, scene.ny, scene.grid, mask, DispersionModel(shift_per_channel=args.shift))
    meas = optics.add_noise(op.forward(scene), args.noise_sigma, args.seed)
    storage.write_measurement(meas, args.out)
    if args.report:
        storage.write_report(RunReport(
            command="simulate",
            noise_sigma=meas.noise_sigma,
            config={"noise_sigma_fraction": args.noise_sigma, "shift_per_channel": args.shift},
            seeds={"noise": args.seed},
        ), args.report)
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    meas = storage.read_measurement(args.meas)
    op = _operator_for(meas, args)
    recon, solve_report = _solve(op, meas, args.algo, args)
    storage.write_cube(recon.clamped(), args.out)
    if args.report:
        extra = {"grid": list(op.grid.wavelengths), "band": args.band, "shift_per_channel": args.shift}
        storage.write_report(_report_from_solve("reconstruct", solve_report, extra), args.report)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    meas = storage.read_measurement(args.meas)
    op = _operator_for(meas, args)
    truth = storage.read_cube(args.truth) if args.truth else None
    extra = {"grid": list(op.grid.wavelengths), "band": args.band, "shift_per_channel": args.shift}

    runs = []
    for algo, out in (("twist", args.out_twist), ("gaptv", args.out_gaptv)):
        recon, solve_report = _solve(op, meas, algo, args)
        recon = recon.clamped()
        storage.write_cube(recon, out)
        run = _report_from_solve("compare", solve_report, extra)
        if truth is not None:
            run.metrics = MetricsSummary(psnr_db=metrics.psnr(recon, truth))
            logger.info(f"{algo}: PSNR {run.metrics.psnr_db:.2f} dB")
        runs.append(run)

    storage.write_report(RunReport(command="compare", runs=runs), args.report)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    recon = storage.read_cube(args.recon)
    truth = storage.read_cube(args.truth)
    warnings: List[str] = []

    correlations = metrics.correlations_at(recon, truth, args.points)
    for c in correlations:
        if c.error:
            logger.warning(f"Correlation undefined: {c.error}")
            warnings.append(c.error)
        else:
            logger.info(f"Spectral correlation at ({c.x}, {c.y}): {c.r:.4f}")

    psnr_db: Optional[float] = None
    try:
        psnr_db = metrics.psnr(recon, truth)
        logger.info(f"PSNR: {psnr_db:.2f} dB")
    except SpectralToolkitError as exc:
        logger.warning(f"PSNR undefined: {exc}")
        warnings.append(str(exc))

    if args.csv:
        storage.export_spectrum_csv(recon, args.points, args.csv)
    storage.write_report(RunReport(
        command="evaluate",
        metrics=MetricsSummary(psnr_db=psnr_db, correlations=correlations),
        config={"points": format_points(args.points)},
        warnings=warnings,
    ), args.out)
    return 0


def cmd_stitch(args: argparse.Namespace) -> int:
    cube = bands.stitch_cubes(storage.read_cube(args.low), storage.read_cube(args.high))
    storage.write_cube(cube, args.out)
    return 0


def cmd_export_band(args: argparse.Namespace) -> int:
    cube = storage.read_cube(args.cube)
    channel = args.channel if args.channel is not None else cube.grid.nearest_channel(args.wavelength)
    export = storage.export_band_image(cube, channel, args.out)
    if args.report:
        warnings = [f"band {channel} is constant; exported as all zeros"] if export.constant else []
        storage.write_report(RunReport(
            command="export-band",
            config={"channel": channel, "wavelength_nm": export.wavelength_nm, "constant": export.constant},
            warnings=warnings,
        ), args.report)
    return 0


# Parser

def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--meas", required=True, help="Measurement HSC file")
    p.add_argument("--mask", required=True, help="Coded aperture MSK file")
    p.add_argument("--grid", required=True, type=_grid_arg, help="Wavelength grid MIN:MAX:N")
    p.add_argument("--shift", type=int, default=settings.SHIFT_PER_CHANNEL, help="Pixel shift per channel")
    p.add_argument("--tau", type=float, help="TwIST regularization weight (default: heuristic)")
    p.add_argument("--alpha", type=float, help="TwIST alpha")
    p.add_argument("--beta", type=float, help="TwIST beta")
    p.add_argument("--monotone", action="store_true", help="TwIST monotone variant")
    p.add_argument("--tv-weight", type=float, help="GAP-TV denoiser strength")
    p.add_argument("--accelerate", action="store_true", help="Accelerated GAP-TV")
    p.add_argument("--iters", type=int, help="Maximum iterations")
    p.add_argument("--tol", type=float, help="Relative objective tolerance (TwIST)")
    p.add_argument("--tv-iters", type=int, help="TV denoiser inner iterations")
    _add_band_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="python -m src.cli", description="R-CASSI simulation and reconstruction")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="Write a synthetic scene")
    p.add_argument("--kind", choices=["letters", "materials"], required=True)
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--grid", type=_grid_arg, required=True, help="Wavelength grid MIN:MAX:N")
    p.add_argument("--glyph", type=parse_glyph, action="append", help="CHAR@CENTER_NM[:FWHM_NM|:laser]")
    _add_band_flags(p)
    p.add_argument("--material-a", default="real-apple")
    p.add_argument("--material-b", default="fake-apple")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("mask", help="Write a random binary coded aperture")
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--nlam", type=int, required=True)
    p.add_argument("--density", type=_density_arg, default=settings.MASK_DENSITY)
    p.add_argument("--seed", type=int, default=settings.MASK_SEED)
    p.add_argument("--shift", type=int, default=settings.SHIFT_PER_CHANNEL)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("simulate", help="Apply the forward model and optional noise")
    p.add_argument("--scene", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="Noise std as a fraction of peak signal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=int, default=settings.SHIFT_PER_CHANNEL)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="Optional JSON report with noise metadata")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="Recover a cube from a measurement")
    _add_solver_flags(p)
    p.add_argument("--algo", choices=["twist", "gaptv"], default="twist")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="Run TwIST and GAP-TV on the same measurement")
    _add_solver_flags(p)
    p.add_argument("--truth", help="Ground-truth HSC for PSNR")
    p.add_argument("--out-twist", required=True)
    p.add_argument("--out-gaptv", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("evaluate", help="Correlations, PSNR and spectra against ground truth")
    p.add_argument("--recon", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--points", type=parse_points, required=True, help="x,y[;x,y...]")
    p.add_argument("--out", required=True, help="JSON report")
    p.add_argument("--csv", help="Spectra CSV at the probe points")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stitch", help="Join low and high sub-band cubes")
    p.add_argument("--low", required=True)
    p.add_argument("--high", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("export-band", help="Write one band as an 8-bit PGM")
    p.add_argument("--cube", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--channel", type=int)
    group.add_argument("--wavelength", type=float, help="Pick the channel nearest this wavelength (nm)")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="Optional JSON report flagging a constant band")
    p.set_defaults(func=cmd_export_band)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpectralToolkitError, ValidationError, OSError) as e:
        logger.error(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
