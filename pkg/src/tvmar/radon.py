"""Discrete Radon transform (pixel-driven, linear bin splatting) and adjoint.

Every pixel center is projected onto the detector line for each angle and its
value, scaled by the grid step h, is split linearly between the two detector
bins bracketing the projected offset.  The back projection applies the exact
algebraic transpose of the same weights: per pixel and angle it reads the
linearly-interpolated detector value and sums over angles.

Conventions (fixed here, used everywhere):
  * angle phi is the ray direction ``(cos phi, sin phi)``;
  * the signed detector offset of a point c is ``s = c . (-sin phi, cos phi)``;
  * detector bin k sits at offset ``(k - (M-1)/2) * bin_spacing * h +
    detector_center``, so an odd M puts a bin exactly at offset 0.

The splatting weights are assembled once per (geometry, image shape, h) into
a scipy CSR matrix; forward/adjoint are then plain sparse matvecs.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass
class Geometry:
    """Parallel-beam acquisition geometry.

    Parameters
    ----------
    angles : ndarray, shape (N,)
        Projection angles in radians, strictly increasing, within [0, pi).
    n_bins : int
        Number of detector bins M.
    bin_spacing : float
        Detector step in pixel units (multiplied by the image h).
    detector_center : float
        Offset of the bin-array center, in the same units as offsets.
    """

    angles: np.ndarray
    n_bins: int
    bin_spacing: float = 1.0
    detector_center: float = 0.0

    def __post_init__(self):
        self.angles = np.ascontiguousarray(self.angles, dtype=np.float64)
        if self.angles.ndim != 1 or self.angles.size < 1:
            raise ValueError("angles must be a non-empty 1-D array")
        if self.n_bins < 1:
            raise ValueError("n_bins must be at least 1")
        if not self.bin_spacing > 0:
            raise ValueError("bin_spacing must be positive")
        if np.any(self.angles < 0) or np.any(self.angles >= np.pi):
            raise ValueError("angles must lie in [0, pi)")
        if self.angles.size > 1 and np.any(np.diff(self.angles) <= 0):
            raise ValueError("angles must be strictly increasing")

    @classmethod
    def uniform(cls, n_angles=180, n_bins=None, img_shape=None,
                bin_spacing=1.0, detector_center=0.0):
        """N angles uniform over [0, pi); bins default to covering the
        diagonal of ``img_shape`` (2*ceil(sqrt(2)*max(n,m)/2)+1, odd)."""
        if n_bins is None:
            if img_shape is None:
                raise ValueError("either n_bins or img_shape is required")
            n_bins = default_n_bins(img_shape)
        angles = np.arange(n_angles) * (np.pi / n_angles)
        return cls(angles=angles, n_bins=n_bins, bin_spacing=bin_spacing,
                   detector_center=detector_center)

    @property
    def n_angles(self):
        return self.angles.size

    @property
    def shape(self):
        return (self.n_angles, self.n_bins)

    def cache_key(self):
        digest = hashlib.sha256(self.angles.tobytes()).hexdigest()
        return (digest, self.n_bins, self.bin_spacing, self.detector_center)


def default_n_bins(img_shape):
    side = max(img_shape)
    return 2 * int(np.ceil(np.sqrt(2.0) * side / 2.0)) + 1


@dataclass
class Sinogram:
    """Projection data on an (angle, offset) grid, line-integral units."""

    values: np.ndarray
    geometry: Geometry

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.geometry.shape:
            raise ValueError(
                f"sinogram shape {self.values.shape} does not match geometry "
                f"{self.geometry.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sinogram values must be finite")

    @property
    def shape(self):
        return self.values.shape


class RadonOperator:
    """Matrix form of the pixel-driven projector for one geometry/image pair.

    ``forward`` maps an image array (rows, cols) to a sinogram array (N, M);
    ``adjoint`` is its exact transpose.
    """

    def __init__(self, geometry, img_shape, h=1.0):
        if not h > 0:
            raise ValueError("h must be positive")
        rows, cols = img_shape
        if rows < 1 or cols < 1:
            raise ValueError("image shape must be at least 1x1")
        self.geometry = geometry
        self.img_shape = (rows, cols)
        self.h = float(h)
        self._check_coverage()
        self._matrix, self._matrix_t = self._build()

    def _check_coverage(self):
        rows, cols = self.img_shape
        g = self.geometry
        r_max = self.h * np.hypot((rows - 1) / 2.0, (cols - 1) / 2.0)
        half_extent = (g.n_bins - 1) / 2.0 * g.bin_spacing * self.h
        needed = r_max + abs(g.detector_center) + 0.5 * g.bin_spacing * self.h
        if half_extent < needed and g.n_bins > 1:
            raise ValueError(
                f"detector too narrow: half extent {half_extent:.3f} < "
                f"required {needed:.3f} (use at least "
                f"{default_n_bins(self.img_shape)} bins)")
        if g.n_bins == 1 and r_max > 0:
            raise ValueError("a single detector bin only covers a 1x1 image")

    def _build(self):
        rows, cols = self.img_shape
        g = self.geometry
        n_pix = rows * cols
        x = (np.arange(cols) - (cols - 1) / 2.0) * self.h
        y = ((rows - 1) / 2.0 - np.arange(rows)) * self.h
        xg, yg = np.meshgrid(x, y)
        xf, yf = xg.ravel(), yg.ravel()

        step = g.bin_spacing * self.h
        # positions of all pixels on the bin axis, per angle: (N, n_pix)
        pos = (np.outer(-np.sin(g.angles), xf) + np.outer(np.cos(g.angles), yf)
               - g.detector_center) / step + (g.n_bins - 1) / 2.0
        k0 = np.floor(pos).astype(np.int64)
        frac = pos - k0
        if g.n_bins == 1:
            k0 = np.zeros_like(k0)
            frac = np.zeros_like(frac)
        np.clip(k0, 0, g.n_bins - 2 if g.n_bins > 1 else 0, out=k0)

        angle_base = (np.arange(g.n_angles, dtype=np.int64) * g.n_bins)[:, None]
        rows_lo = (angle_base + k0).ravel()
        cols_idx = np.tile(np.arange(n_pix, dtype=np.int64), g.n_angles)
        w_lo = (self.h * (1.0 - frac)).ravel()
        w_hi = (self.h * frac).ravel()

        if g.n_bins > 1:
            coo_rows = np.concatenate([rows_lo, rows_lo + 1])
            coo_cols = np.concatenate([cols_idx, cols_idx])
            coo_data = np.concatenate([w_lo, w_hi])
        else:
            coo_rows, coo_cols, coo_data = rows_lo, cols_idx, w_lo
        mat = sp.coo_matrix(
            (coo_data, (coo_rows, coo_cols)),
            shape=(g.n_angles * g.n_bins, n_pix)).tocsr()
        return mat, mat.T.tocsr()

    @property
    def matrix(self):
        """The CSR matrix of the operator, shape (N*M, rows*cols)."""
        return self._matrix

    def forward(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.img_shape:
            raise ValueError(
                f"image shape {values.shape} does not match operator "
                f"{self.img_shape}")
        out = self._matrix @ values.ravel()
        return out.reshape(self.geometry.shape)

    def adjoint(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.geometry.shape:
            raise ValueError(
                f"sinogram shape {values.shape} does not match geometry "
                f"{self.geometry.shape}")
        out = self._matrix_t @ values.ravel()
        return out.reshape(self.img_shape)

    def norm_estimate(self, iters=50, seed=0):
        """Power iteration on A*A; sqrt of the largest Rayleigh quotient seen.

        Monotone nondecreasing in ``iters`` and always <= the true norm.
        """
        if iters < 1:
            raise ValueError("iters must be at least 1")
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(self.img_shape)
        x /= np.linalg.norm(x)
        best = 0.0
        for _ in range(iters):
            ax = self.forward(x)
            best = max(best, float(np.vdot(ax, ax).real))
            x = self.adjoint(ax)
            nx = np.linalg.norm(x)
            if nx == 0.0:
                break
            x /= nx
        return float(np.sqrt(best))


_OPERATOR_CACHE = {}
_CACHE_LIMIT = 8


def operator_for(geometry, img_shape, h=1.0):
    """Shared, cached `RadonOperator` for repeated use of one geometry."""
    key = (geometry.cache_key(), tuple(img_shape), float(h))
    op = _OPERATOR_CACHE.get(key)
    if op is None:
        op = RadonOperator(geometry, img_shape, h)
        if len(_OPERATOR_CACHE) >= _CACHE_LIMIT:
            _OPERATOR_CACHE.pop(next(iter(_OPERATOR_CACHE)))
        _OPERATOR_CACHE[key] = op
    return op


def project(img, geometry):
    """Radon transform of an `Image` under ``geometry``; linear in the image."""
    op = operator_for(geometry, img.shape, img.h)
    return Sinogram(op.forward(img.values), geometry)


def backproject(sino, img_shape, h=1.0):
    """Exact adjoint of `project`: linear back projection onto ``img_shape``.

    Satisfies ``<project(u), v> = <u, backproject(v)>`` up to rounding.
    """
    from .phantom import Image

    op = operator_for(sino.geometry, img_shape, h)
    return Image(op.adjoint(sino.values), h)


def estimate_norm(geometry, img_shape, iters=50, h=1.0, seed=0):
    """Power-iteration estimate of the operator norm of the projector."""
    return operator_for(geometry, img_shape, h).norm_estimate(iters, seed)


class NormalizedRadon:
    """Projector scaled by 1/D with D a crude upper bound for its norm.

    The scaled operator has norm < 1.  ``scale`` records D so that data and
    cap threshold can be divided consistently (the feasible set
    ``{A u >= C on the mask}`` is invariant under scaling both sides).
    """

    def __init__(self, op, scale):
        self._op = op
        self.scale = float(scale)
        self.geometry = op.geometry
        self.img_shape = op.img_shape
        self.h = op.h

    def forward(self, values):
        return self._op.forward(values) / self.scale

    def adjoint(self, values):
        return self._op.adjoint(values) / self.scale

    def norm_estimate(self, iters=50, seed=0):
        return self._op.norm_estimate(iters, seed) / self.scale


def normalized_operator(geometry, img_shape, h=1.0, power_iters=50,
                        safety=1.05, seed=0):
    """Forward/adjoint pair scaled so the forward operator has norm < 1.

    D = safety * power-iteration estimate; the safety factor (default 1.05)
    covers the estimate approaching the true norm from below.
    """
    op = operator_for(geometry, img_shape, h)
    est = op.norm_estimate(power_iters, seed)
    if est <= 0:
        raise ValueError("operator norm estimate is zero; degenerate geometry")
    return NormalizedRadon(op, safety * est)
