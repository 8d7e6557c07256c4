"""Synthetic test images: Shepp-Logan head phantom plus a high-density insert."""

from dataclasses import dataclass

import numpy as np

# Ellipse table (intensity, x half-axis, y half-axis, x center, y center,
# rotation in degrees, counterclockwise).  This is the contrast-improved
# variant of the classic 10-ellipse head phantom that MATLAB's phantom()
# and scikit-image ship as the default; its values already lie in [0, 1].
_ELLIPSES = [
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
]


@dataclass
class Image:
    """A real-valued pixel grid on a square lattice.

    Pixel (0, 0) is the top-left corner; row index i runs downward, column
    index j runs rightward.  The pixel center of (i, j) sits at
    ``x = (j - (cols-1)/2) * h``, ``y = ((rows-1)/2 - i) * h`` (y up).

    Parameters
    ----------
    values : ndarray, shape (rows, cols)
        Density values, finite.
    h : float
        Grid spacing, > 0.  Dimensionless pixel size, default 1.
    """

    values: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {self.values.shape}")
        rows, cols = self.values.shape
        if rows < 1 or cols < 1:
            raise ValueError("image must have at least one pixel per axis")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("image values must be finite")

    @property
    def shape(self):
        return self.values.shape

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class MetalInsert:
    """Axis-aligned rectangular region whose density is raised by a constant.

    ``row0``/``col0`` index the top-left pixel of the region, ``rows``/``cols``
    its extent.  ``added_value`` must be >= 0 (0 leaves the image unchanged).
    """

    row0: int
    col0: int
    rows: int = 10
    cols: int = 10
    added_value: float = 3.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("insert extent must be at least 1x1")
        if self.row0 < 0 or self.col0 < 0:
            raise ValueError("insert origin must be non-negative")
        if self.added_value < 0:
            raise ValueError("added_value must be non-negative")


def _pixel_grid(height, width):
    """Pixel-center coordinates mapped onto the square [-1, 1]^2, y up."""
    x = (2.0 * np.arange(width) + 1.0 - width) / width
    y = -(2.0 * np.arange(height) + 1.0 - height) / height
    return np.meshgrid(x, y)


def shepp_logan(width, height):
    """Generate the 10-ellipse Shepp-Logan head phantom with values in [0, 1].

    Ellipse intensities are additive; the result is clipped to [0, 1]
    (a no-op for this table, kept as a guarantee).  Deterministic.

    Parameters
    ----------
    width, height : int
        Output size in pixels, each >= 8.

    Returns
    -------
    Image
    """
    if width < 8 or height < 8:
        raise ValueError(f"phantom size must be at least 8x8, got {width}x{height}")
    xg, yg = _pixel_grid(height, width)
    values = np.zeros((height, width))
    for intensity, a, b, x0, y0, phi_deg in _ELLIPSES:
        phi = np.deg2rad(phi_deg)
        xr = (xg - x0) * np.cos(phi) + (yg - y0) * np.sin(phi)
        yr = -(xg - x0) * np.sin(phi) + (yg - y0) * np.cos(phi)
        values[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += intensity
    np.clip(values, 0.0, 1.0, out=values)
    return Image(values)


def ellipse_sum_at(x, y):
    """Sum of ellipse intensities covering the point (x, y) in [-1, 1]^2.

    Direct point-in-ellipse evaluation of the phantom's analytic definition,
    before clipping.  Intended as an independent check of `shepp_logan`.
    """
    total = 0.0
    for intensity, a, b, x0, y0, phi_deg in _ELLIPSES:
        phi = np.deg2rad(phi_deg)
        xr = (x - x0) * np.cos(phi) + (y - y0) * np.sin(phi)
        yr = -(x - x0) * np.sin(phi) + (y - y0) * np.cos(phi)
        if (xr / a) ** 2 + (yr / b) ** 2 <= 1.0:
            total += intensity
    return total


def add_metal(img, insert):
    """Return a copy of ``img`` with ``insert.added_value`` added on the region.

    The insert must lie entirely inside the image bounds.
    """
    if insert.row0 + insert.rows > img.height or insert.col0 + insert.cols > img.width:
        raise ValueError(
            f"insert region {insert.rows}x{insert.cols} at "
            f"({insert.row0},{insert.col0}) exceeds image bounds {img.shape}"
        )
    values = img.values.copy()
    values[insert.row0:insert.row0 + insert.rows,
           insert.col0:insert.col0 + insert.cols] += insert.added_value
    return Image(values, img.h)


def default_metal_insert(height, width, rows=10, cols=10, added_value=3.0):
    """Insert placed mid-height, centered in the right half of the interior."""
    row0 = (height - rows) // 2
    col0 = int(round(0.70 * width)) - cols // 2
    return MetalInsert(row0=row0, col0=col0, rows=rows, cols=cols,
                       added_value=added_value)
