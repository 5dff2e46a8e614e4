"""Synthetic scenes and random coded apertures."""
from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.special import expit

from src.config import settings
from src.models.aperture import CodedAperture, DispersionModel
from src.models.errors import ParameterError, PhantomError
from src.models.scene import Glyph, MaterialSpectrum
from src.models.spectral import SpectralCube, WavelengthGrid
from src.services.optics import required_mask_width
from src.utils.font import GLYPH_HEIGHT, GLYPH_WIDTH, glyph_bitmap
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

GlyphLike = Union[Glyph, Tuple[str, float, Optional[float]]]


def random_mask(
    nx: int,
    ny: int,
    n_channels: int,
    density: float = settings.MASK_DENSITY,
    seed: int = settings.MASK_SEED,
    dispersion: Optional[DispersionModel] = None,
) -> CodedAperture:
    """I.i.d. Bernoulli(density) mask over the extended width the operator needs."""
    if not 0.0 <= density <= 1.0:
        raise ParameterError(f"mask density must be in [0, 1], got {density}")
    if nx < 1 or ny < 1 or n_channels < 1:
        raise ParameterError(f"invalid mask dimensions nx={nx}, ny={ny}, n_channels={n_channels}")
    dispersion = dispersion or DispersionModel()
    width = required_mask_width(nx, n_channels, dispersion)
    rng = np.random.default_rng(seed)
    values = (rng.random((ny, width)) < density).astype(np.uint8)
    logger.info(f"Random mask {width}x{ny}: density={density}, seed={seed}, open={values.mean():.4f}")
    return CodedAperture(values=values, origin_offset=dispersion.origin_offset(n_channels))


def _as_glyph(item: GlyphLike) -> Glyph:
    if isinstance(item, Glyph):
        return item
    char, center, *rest = item
    fwhm = rest[0] if rest else None
    return Glyph(char=char, center_nm=center, fwhm_nm=fwhm)


def resolve_fwhm(glyph: Glyph, grid: WavelengthGrid) -> float:
    """Explicit FWHM, else one channel spacing for lasers and LED_FWHM_NM for LEDs."""
    if glyph.fwhm_nm is not None:
        return glyph.fwhm_nm
    if glyph.source == "laser":
        return grid.spacing
    return settings.LED_FWHM_NM


def line_spectrum(center_nm: float, fwhm_nm: float, grid: WavelengthGrid) -> np.ndarray:
    """Gaussian source line with analytic peak 1; zero width puts 1 in the nearest channel."""
    if not grid.first <= center_nm <= grid.last:
        raise PhantomError(
            f"source wavelength {center_nm} nm outside grid [{grid.first}, {grid.last}]"
        )
    if fwhm_nm <= 0:
        spectrum = np.zeros(grid.n_channels)
        spectrum[grid.nearest_channel(center_nm)] = 1.0
        return spectrum
    sigma = fwhm_nm * FWHM_TO_SIGMA
    return np.exp(-0.5 * ((grid.values - center_nm) / sigma) ** 2)


def letter_layout(n_glyphs: int, nx: int, ny: int) -> Tuple[int, List[Tuple[int, int]]]:
    """Integer scale and top-left corners for glyphs set in one centered row."""
    if n_glyphs == 0:
        return 0, []
    scale = min(nx // ((GLYPH_WIDTH + 1) * n_glyphs + 1), ny // (GLYPH_HEIGHT + 2))
    if scale < 1:
        raise PhantomError(f"{n_glyphs} glyphs do not fit a {nx}x{ny} canvas")
    row_width = ((GLYPH_WIDTH + 1) * n_glyphs - 1) * scale
    x0 = (nx - row_width) // 2
    y0 = (ny - GLYPH_HEIGHT * scale) // 2
    corners = [(x0 + i * (GLYPH_WIDTH + 1) * scale, y0) for i in range(n_glyphs)]
    return scale, corners


def letter_target(
    glyphs: Sequence[GlyphLike],
    nx: int,
    ny: int,
    grid: WavelengthGrid,
) -> SpectralCube:
    """
    Letters on a dark background, each lit by its own narrow source.

    Glyphs are set left to right in one row with the largest integer scale
    of the 5x7 font that fits the canvas.
    """
    try:
        parsed = [_as_glyph(g) for g in glyphs]
    except (ValidationError, ValueError) as exc:
        raise PhantomError(f"invalid glyph: {exc}") from exc

    data = np.zeros((grid.n_channels, ny, nx))
    scale, corners = letter_layout(len(parsed), nx, ny)
    for glyph, (gx, gy) in zip(parsed, corners):
        spectrum = line_spectrum(glyph.center_nm, resolve_fwhm(glyph, grid), grid)
        try:
            stencil = glyph_bitmap(glyph.char, scale)
        except KeyError as exc:
            raise PhantomError(str(exc)) from exc
        h, w = stencil.shape
        region = data[:, gy:gy + h, gx:gx + w]
        np.maximum(region, stencil[np.newaxis] * spectrum[:, np.newaxis, np.newaxis], out=region)
        logger.debug(f"Glyph {glyph.char!r} at ({gx}, {gy}), scale {scale}, center {glyph.center_nm} nm")

    return SpectralCube(grid=grid, data=data)


def glyph_regions(chars: Sequence[str], nx: int, ny: int) -> List[np.ndarray]:
    """Boolean (ny, nx) masks of the pixels each glyph of `letter_target` covers."""
    scale, corners = letter_layout(len(chars), nx, ny)
    regions = []
    for char, (gx, gy) in zip(chars, corners):
        stencil = glyph_bitmap(char, scale) > 0
        region = np.zeros((ny, nx), dtype=bool)
        h, w = stencil.shape
        region[gy:gy + h, gx:gx + w] = stencil
        regions.append(region)
    return regions


def real_apple_spectrum(grid: WavelengthGrid) -> MaterialSpectrum:
    """Smooth red-edge reflectance with a 900-980 nm dip and suppression past 1350 nm."""
    lam = grid.values
    base = 0.15 + 0.65 * expit((lam - 730.0) / 25.0)
    dip = 1.0 - 0.35 * np.exp(-0.5 * ((lam - 940.0) / 22.0) ** 2)
    suppress = 1.0 - 0.45 * expit((lam - 1350.0) / 30.0)
    water = 1.0 - 0.25 * np.exp(-0.5 * ((lam - 1450.0) / 40.0) ** 2)
    return MaterialSpectrum(name="real-apple", values=tuple(float(v) for v in base * dip * suppress * water))


def fake_apple_spectrum(grid: WavelengthGrid) -> MaterialSpectrum:
    """Smooth reflectance without absorption features."""
    lam = grid.values
    values = 0.2 + 0.6 * expit((lam - 760.0) / 35.0) - 0.05 * (lam - 700.0) / 900.0
    return MaterialSpectrum(name="fake-apple", values=tuple(float(v) for v in np.clip(values, 0.0, 1.0)))


BUILTIN_MATERIALS = {
    "real-apple": real_apple_spectrum,
    "fake-apple": fake_apple_spectrum,
}


def builtin_material(name: str, grid: WavelengthGrid) -> MaterialSpectrum:
    try:
        return BUILTIN_MATERIALS[name](grid)
    except KeyError as exc:
        raise PhantomError(f"unknown material '{name}'; known: {sorted(BUILTIN_MATERIALS)}") from exc


def _disk_geometry(nx: int, ny: int) -> Tuple[float, Tuple[float, float], Tuple[float, float]]:
    radius = 0.4 * min(nx / 2.0, float(ny))
    return radius, (nx / 4.0, ny / 2.0), (3.0 * nx / 4.0, ny / 2.0)


def material_probe_points(nx: int, ny: int) -> List[Tuple[int, int]]:
    """Pixels at the centers of the left and right objects."""
    _, (ax, ay), (bx, by) = _disk_geometry(nx, ny)
    return [(int(ax), int(ay)), (int(bx), int(by))]


def material_scene(
    nx: int,
    ny: int,
    grid: WavelengthGrid,
    spec_a: Optional[MaterialSpectrum] = None,
    spec_b: Optional[MaterialSpectrum] = None,
) -> SpectralCube:
    """
    Two disks on a dark background: spec_a on the left half, spec_b on the
    right. Defaults to the built-in real/fake apple pair.
    """
    spec_a = spec_a or real_apple_spectrum(grid)
    spec_b = spec_b or fake_apple_spectrum(grid)
    for spec in (spec_a, spec_b):
        if len(spec.values) != grid.n_channels:
            raise PhantomError(
                f"spectrum '{spec.name}' has {len(spec.values)} values, grid has {grid.n_channels}"
            )

    radius, center_a, center_b = _disk_geometry(nx, ny)
    if radius < 1.0:
        raise PhantomError(f"canvas {nx}x{ny} too small for two objects")
    yy, xx = np.mgrid[0:ny, 0:nx] + 0.5
    data = np.zeros((grid.n_channels, ny, nx))
    for spec, (cx, cy) in ((spec_a, center_a), (spec_b, center_b)):
        disk = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius ** 2
        data[:, disk] = spec.array[:, np.newaxis]
    logger.info(f"Material scene {nx}x{ny}x{grid.n_channels}: '{spec_a.name}' | '{spec_b.name}'")
    return SpectralCube(grid=grid, data=data)
