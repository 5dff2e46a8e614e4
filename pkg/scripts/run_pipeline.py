import argparse
from pathlib import Path
from typing import List

from src import cli
from src.config import settings
from src.services.bands import parse_grid_spec, split_bands
from src.services.phantoms import material_probe_points
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def run(step: str, argv: List[str]) -> None:
    logger.info(f">> {step}: {' '.join(argv)}")
    code = cli.main([str(a) for a in argv])
    if code != 0:
        raise RuntimeError(f"step '{step}' failed with exit code {code}")


def run_band(args, band: str, n_channels: int, workdir: Path) -> Path:
    """phantom -> mask -> simulate -> reconstruct for one sub-band; returns the recon path."""
    scene = workdir / f"{band}_scene.hsc"
    mask = workdir / f"{band}_mask.msk"
    meas = workdir / f"{band}_meas.hsc"
    recon = workdir / f"{band}_recon.hsc"
    common = ["--grid", args.grid, "--band", band, "--boundary", args.boundary]

    run("phantom", ["phantom", "--kind", "materials", "--nx", args.nx, "--ny", args.ny, "--out", scene, *common])
    run("mask", ["mask", "--nx", args.nx, "--ny", args.ny, "--nlam", n_channels,
                 "--density", args.density, "--seed", args.mask_seed, "--out", mask])
    run("simulate", ["simulate", "--scene", scene, "--mask", mask, "--noise-sigma", args.noise,
                     "--seed", args.noise_seed, "--out", meas, "--report", workdir / f"{band}_simulate.json"])
    run("reconstruct", ["reconstruct", "--meas", meas, "--mask", mask, "--algo", args.algo,
                        "--iters", args.iters, "--out", recon, "--report", workdir / f"{band}_recon.json", *common])
    return recon


def main():
    ap = argparse.ArgumentParser(description="Two-sub-band material discrimination run")
    ap.add_argument("--workdir", default="runs/materials")
    ap.add_argument("--grid", default="700:1600:52")
    ap.add_argument("--boundary", type=float, default=settings.BAND_BOUNDARY_NM)
    ap.add_argument("--nx", type=int, default=128)
    ap.add_argument("--ny", type=int, default=128)
    ap.add_argument("--density", type=float, default=settings.MASK_DENSITY)
    ap.add_argument("--mask-seed", type=int, default=settings.MASK_SEED)
    ap.add_argument("--noise", type=float, default=0.01, help="Noise std as a fraction of peak signal")
    ap.add_argument("--noise-seed", type=int, default=0)
    ap.add_argument("--algo", choices=["twist", "gaptv"], default="twist")
    ap.add_argument("--iters", type=int, default=settings.MAX_ITERS)
    args = ap.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    split = split_bands(parse_grid_spec(args.grid), args.boundary)

    try:
        # 1. Each sub-band is simulated and reconstructed on its own
        low = run_band(args, "low", len(split.low_indices), workdir)
        high = run_band(args, "high", len(split.high_indices), workdir)

        # 2. Stitch reconstructions and ground truths
        run("stitch", ["stitch", "--low", low, "--high", high, "--out", workdir / "recon.hsc"])
        run("stitch", ["stitch", "--low", workdir / "low_scene.hsc", "--high", workdir / "high_scene.hsc",
                       "--out", workdir / "truth.hsc"])

        # 3. Score at the object centers
        points = cli.format_points(material_probe_points(args.nx, args.ny))
        run("evaluate", ["evaluate", "--recon", workdir / "recon.hsc", "--truth", workdir / "truth.hsc",
                         "--points", points, "--out", workdir / "evaluate.json", "--csv", workdir / "spectra.csv"])
        logger.info(f"[SUCCESS] Pipeline finished; artifacts in {workdir}")
    except RuntimeError as e:
        logger.critical(f"[ERROR] {e}")
        raise SystemExit(1)


if __name__ == "__main__":
    main()
