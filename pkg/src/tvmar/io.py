"""Bit-exact binary grid files, CSV export and 8-bit PNG rendering.

Grid file layout (little-endian throughout):

    offset  size  field
    0       4     magic ``MARG``
    4       2     version (u16) = 1
    6       1     kind (u8): 0 = image, 1 = sinogram
    7       4     rows (u32)
    11      4     cols (u32)
    15      32    4 f64 header slots: h, cap, angle0, angle_step
                  (unused slots hold NaN; for sinograms the h slot carries
                  the detector bin spacing in pixel units)
    47      ...   rows*cols f64 payload, row-major

Payloads round-trip bitwise, including NaN bit patterns.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"MARG"
VERSION = 1
KIND_IMAGE = 0
KIND_SINOGRAM = 1
_HEADER = struct.Struct("<4sHBII4d")


class GridFormatError(ValueError):
    """Malformed grid file; the message names the failing byte offset."""


@dataclass
class GridFile:
    """In-memory form of one grid file: payload plus typed header slots."""

    kind: int
    values: np.ndarray
    h: float = math.nan
    cap: float = math.nan
    angle0: float = math.nan
    angle_step: float = math.nan

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("grid payload must be 2-D")
        if self.kind not in (KIND_IMAGE, KIND_SINOGRAM):
            raise ValueError(f"unknown grid kind {self.kind}")


def write_grid(path, grid):
    """Write a `GridFile` (bitwise round-trip with `read_grid`)."""
    rows, cols = grid.values.shape
    header = _HEADER.pack(MAGIC, VERSION, grid.kind, rows, cols,
                          grid.h, grid.cap, grid.angle0, grid.angle_step)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(grid.values.tobytes(order="C"))


def read_grid(path):
    """Read a `GridFile`, validating magic, version and payload length."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise GridFormatError(
            f"truncated header: expected {_HEADER.size} bytes, got {len(raw)}"
            " (offset 0)")
    magic, version, kind, rows, cols, h, cap, angle0, angle_step = \
        _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r} at offset 0")
    if version != VERSION:
        raise GridFormatError(f"unsupported version {version} at offset 4")
    if kind not in (KIND_IMAGE, KIND_SINOGRAM):
        raise GridFormatError(f"unknown kind {kind} at offset 6")
    expected = _HEADER.size + rows * cols * 8
    if len(raw) != expected:
        raise GridFormatError(
            f"payload length mismatch: expected {expected} bytes, got "
            f"{len(raw)} (payload starts at offset {_HEADER.size})")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    return GridFile(kind=kind, values=values.copy(), h=h, cap=cap,
                    angle0=angle0, angle_step=angle_step)


def image_to_grid(img, cap=math.nan):
    return GridFile(kind=KIND_IMAGE, values=img.values, h=img.h, cap=cap)


def grid_to_image(grid):
    from .phantom import Image

    if grid.kind != KIND_IMAGE:
        raise GridFormatError(f"expected an image grid, got kind {grid.kind}")
    h = grid.h if math.isfinite(grid.h) else 1.0
    return Image(grid.values, h)


def sinogram_to_grid(sino, cap=math.nan):
    g = sino.geometry
    step = g.angles[1] - g.angles[0] if g.n_angles > 1 else math.pi
    if g.n_angles > 2 and not np.allclose(np.diff(g.angles), step):
        raise ValueError("only uniformly spaced angles can be serialized")
    if g.detector_center != 0.0:
        raise ValueError("only centered detectors can be serialized")
    return GridFile(kind=KIND_SINOGRAM, values=sino.values, h=g.bin_spacing,
                    cap=cap, angle0=float(g.angles[0]), angle_step=float(step))


def grid_to_sinogram(grid):
    from .radon import Geometry, Sinogram

    if grid.kind != KIND_SINOGRAM:
        raise GridFormatError(f"expected a sinogram grid, got kind {grid.kind}")
    n_angles, n_bins = grid.values.shape
    angle0 = grid.angle0 if math.isfinite(grid.angle0) else 0.0
    step = grid.angle_step if math.isfinite(grid.angle_step) else math.pi / n_angles
    spacing = grid.h if math.isfinite(grid.h) else 1.0
    angles = angle0 + step * np.arange(n_angles)
    geom = Geometry(angles=angles, n_bins=n_bins, bin_spacing=spacing)
    return Sinogram(grid.values, geom)


def write_csv(path, values):
    """Row-major CSV at full double precision, for cross-tool comparison."""
    np.savetxt(path, np.asarray(values, dtype=np.float64),
               fmt="%.17g", delimiter=",")


def read_csv(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=","))


def export_png(values, path, window=(0.0, 1.0)):
    """8-bit grayscale PNG: linear map of [lo, hi] to [0, 255] with clamping.

    Midpoint values round half away from zero (level 128 for the window
    center).  Monotone: larger values never map darker.
    """
    from PIL import Image as PILImage

    lo, hi = window
    if not lo < hi:
        raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    arr = np.asarray(values.values if hasattr(values, "values") else values,
                     dtype=np.float64)
    levels = np.clip((arr - lo) / (hi - lo), 0.0, 1.0) * 255.0
    byte = np.floor(levels + 0.5).astype(np.uint8)
    PILImage.fromarray(byte, mode="L").save(path, format="PNG")
