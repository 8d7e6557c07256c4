"""Evaluation: peak signal-to-noise ratio and the filtered-back-projection
baseline that exhibits the streak artifacts on capped data."""

import math

import numpy as np

from .radon import operator_for


def psnr(u, ref, peak=1.0, clip=False):
    """10*log10(peak^2 / MSE) in dB; ``inf`` for identical inputs.

    With ``clip`` both images are clamped to [0, peak] first, so that
    high-density inserts compare on the displayed value range.
    """
    a = np.asarray(u.values if hasattr(u, "values") else u, dtype=np.float64)
    b = np.asarray(ref.values if hasattr(ref, "values") else ref, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not peak > 0:
        raise ValueError("peak must be positive")
    if clip:
        a = np.clip(a, 0.0, peak)
        b = np.clip(b, 0.0, peak)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _ramp_filtered(values, bin_spacing):
    """Ramp-filter each angle's projection in the frequency domain.

    Zero-padded to the next power of two at least twice the detector width
    to avoid circular-convolution wrap-around.
    """
    n_bins = values.shape[1]
    padded = max(64, 2 ** int(np.ceil(np.log2(2 * n_bins))))
    ramp = 2.0 * np.abs(np.fft.fftfreq(padded)) / bin_spacing
    spectrum = np.fft.fft(values, n=padded, axis=1) * ramp
    return np.real(np.fft.ifft(spectrum, axis=1))[:, :n_bins]


def fbp_baseline(sino, img_shape, h=1.0, filter="ram-lak"):
    """(Filtered) back projection onto ``img_shape``.

    ``filter='ram-lak'`` multiplies each projection by the ramp in the
    frequency domain before back projecting; ``'none'`` back projects the
    raw data (heavily blurred reference).  Both are scaled by
    ``pi / (2 * n_angles * h^2)`` so amplitudes are recovered when the
    detector step equals the pixel size; this is the classical FBP
    normalization, not a fit to any external tool.
    """
    from .phantom import Image

    if filter not in ("ram-lak", "none"):
        raise ValueError(f"filter must be 'ram-lak' or 'none', got {filter!r}")
    geom = sino.geometry
    values = sino.values
    if filter == "ram-lak":
        values = _ramp_filtered(values, geom.bin_spacing * h)
    op = operator_for(geom, img_shape, h)
    scale = math.pi / (2.0 * geom.n_angles * h * h)
    return Image(op.adjoint(values) * scale, h)
