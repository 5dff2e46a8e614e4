"""
Bit-exact artifact formats.

HSC (cubes and measurements), little-endian, no padding:
    b"HSC1" | u32 nx | u32 ny | u32 n_lambda | f64 wavelengths[n_lambda]
    | f32 data[n_lambda * ny * nx]   (band-major, then row-major)

MSK (coded apertures):
    b"MSK1" | u32 width | u32 height | i32 origin_offset | u8 values[height * width]
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from PIL import Image
from pydantic import ValidationError

from src.models.aperture import CodedAperture
from src.models.errors import DimensionError, FormatError, ParameterError, StorageError, UnsupportedVersionError
from src.models.report import RunReport
from src.models.spectral import Measurement, SpectralCube, WavelengthGrid
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

PathLike = Union[str, Path]

HSC_MAGIC = b"HSC1"
MSK_MAGIC = b"MSK1"
_HSC_HEADER = struct.Struct("<4sIII")
_MSK_HEADER = struct.Struct("<4sIIi")
MEASUREMENT_WAVELENGTH_SLOT = 0.0


@dataclass
class BandExport:
    """Result of exporting one band as an 8-bit image."""

    path: Path
    channel: int
    wavelength_nm: float
    constant: bool


def _check_magic(raw: bytes, expected: bytes, path: PathLike) -> None:
    if len(raw) < 4:
        raise FormatError(f"{path}: truncated file ({len(raw)} bytes)")
    magic = raw[:4]
    if magic == expected:
        return
    if magic[:3] == expected[:3]:
        raise UnsupportedVersionError(f"{path}: unsupported version {magic!r}")
    raise FormatError(f"{path}: bad magic {magic!r}")


def _write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    return path


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc


def _encode_hsc(wavelengths: Sequence[float], data: np.ndarray) -> bytes:
    n_lambda, ny, nx = data.shape
    header = _HSC_HEADER.pack(HSC_MAGIC, nx, ny, n_lambda)
    return (
        header
        + np.asarray(wavelengths, dtype="<f8").tobytes()
        + np.ascontiguousarray(data, dtype="<f4").tobytes()
    )


def _decode_hsc(raw: bytes, path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    _check_magic(raw, HSC_MAGIC, path)
    if len(raw) < _HSC_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    _, nx, ny, n_lambda = _HSC_HEADER.unpack_from(raw, 0)
    if nx == 0 or ny == 0 or n_lambda == 0:
        raise FormatError(f"{path}: empty dimensions {nx}x{ny}x{n_lambda}")
    wl_end = _HSC_HEADER.size + 8 * n_lambda
    data_end = wl_end + 4 * nx * ny * n_lambda
    if len(raw) < data_end:
        raise FormatError(f"{path}: truncated file ({len(raw)} of {data_end} bytes)")
    if len(raw) > data_end:
        raise FormatError(f"{path}: {len(raw) - data_end} trailing bytes")
    wavelengths = np.frombuffer(raw, dtype="<f8", count=n_lambda, offset=_HSC_HEADER.size)
    data = np.frombuffer(raw, dtype="<f4", count=nx * ny * n_lambda, offset=wl_end)
    return wavelengths.astype(np.float64), data.astype(np.float64).reshape(n_lambda, ny, nx)


def write_cube(cube: SpectralCube, path: PathLike) -> Path:
    path = _write_bytes(path, _encode_hsc(cube.grid.wavelengths, cube.data))
    logger.info(f"Wrote cube {cube.nx}x{cube.ny}x{cube.n_channels} to {path}")
    return path


def read_cube(path: PathLike) -> SpectralCube:
    wavelengths, data = _decode_hsc(_read_bytes(path), path)
    try:
        grid = WavelengthGrid(wavelengths=tuple(float(w) for w in wavelengths))
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid wavelengths: {exc}") from exc
    try:
        return SpectralCube(grid=grid, data=data)
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid cube data: {exc}") from exc


def write_measurement(meas: Measurement, path: PathLike) -> Path:
    """Stores a measurement as a one-band HSC; noise_sigma is not part of the file."""
    path = _write_bytes(path, _encode_hsc([MEASUREMENT_WAVELENGTH_SLOT], meas.data[np.newaxis]))
    logger.info(f"Wrote measurement {meas.nx}x{meas.ny} to {path}")
    return path


def read_measurement(path: PathLike) -> Measurement:
    _, data = _decode_hsc(_read_bytes(path), path)
    if data.shape[0] != 1:
        raise FormatError(f"{path}: measurement must have n_lambda = 1, got {data.shape[0]}")
    try:
        return Measurement(data=data[0])
    except ValidationError as exc:
        raise FormatError(f"{path}: invalid measurement data: {exc}") from exc


def write_mask(mask: CodedAperture, path: PathLike) -> Path:
    header = _MSK_HEADER.pack(MSK_MAGIC, mask.width, mask.height, mask.origin_offset)
    path = _write_bytes(path, header + np.ascontiguousarray(mask.values, dtype=np.uint8).tobytes())
    logger.info(f"Wrote mask {mask.width}x{mask.height} (offset {mask.origin_offset}) to {path}")
    return path


def read_mask(path: PathLike) -> CodedAperture:
    raw = _read_bytes(path)
    _check_magic(raw, MSK_MAGIC, path)
    if len(raw) < _MSK_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    _, width, height, origin_offset = _MSK_HEADER.unpack_from(raw, 0)
    expected = _MSK_HEADER.size + width * height
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype=np.uint8, offset=_MSK_HEADER.size).reshape(height, width)
    if np.any(values > 1):
        raise FormatError(f"{path}: mask byte outside {{0, 1}}")
    return CodedAperture(values=values, origin_offset=origin_offset)


def export_band_image(cube: SpectralCube, channel: int, path: PathLike) -> BandExport:
    """
    Writes one band as an 8-bit PGM with min-max normalization. A constant
    band is written as all zeros and flagged.
    """
    if not 0 <= channel < cube.n_channels:
        raise DimensionError(f"channel {channel} outside 0..{cube.n_channels - 1}")
    band = cube.data[channel]
    lo, hi = float(band.min()), float(band.max())
    constant = hi == lo
    if constant:
        pixels = np.zeros(band.shape, dtype=np.uint8)
        logger.warning(f"Band {channel} is constant ({lo}); exporting all-zero image")
    else:
        pixels = np.rint((band - lo) / (hi - lo) * 255.0).astype(np.uint8)

    path = Path(path)
    try:
        Image.fromarray(pixels).save(path, format="PPM")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Exported band {channel} ({cube.grid.wavelengths[channel]:.2f} nm) to {path}")
    return BandExport(path=path, channel=channel, wavelength_nm=cube.grid.wavelengths[channel], constant=constant)


def export_spectrum_csv(cube: SpectralCube, points: Sequence[Tuple[int, int]], path: PathLike) -> Path:
    """One row per channel: wavelength_nm, then the spectrum at each point."""
    if not points:
        raise ParameterError("at least one point is required")
    for x, y in points:
        if not (0 <= x < cube.nx and 0 <= y < cube.ny):
            raise DimensionError(f"point ({x}, {y}) outside {cube.nx}x{cube.ny} canvas")

    path = Path(path)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["wavelength_nm"] + [f"p{i + 1}" for i in range(len(points))])
            for k, wavelength in enumerate(cube.grid.wavelengths):
                writer.writerow([repr(float(wavelength))] + [repr(float(cube.data[k, y, x])) for x, y in points])
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote spectra at {len(points)} points to {path}")
    return path


def read_spectrum_csv(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (wavelengths, spectra) with spectra shaped (n_points, n_channels)."""
    try:
        with open(path, newline="") as f:
            rows: List[List[str]] = list(csv.reader(f))
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    if not rows or not rows[0] or rows[0][0] != "wavelength_nm":
        raise FormatError(f"{path}: missing 'wavelength_nm' header")
    try:
        table = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry: {exc}") from exc
    return table[:, 0], table[:, 1:].T


def write_report(report: RunReport, path: PathLike) -> Path:
    path = _write_bytes(path, (report.model_dump_json(indent=2) + "\n").encode("utf-8"))
    logger.info(f"Wrote report to {path}")
    return path
