"""Sinogram degradation: detector saturation (capping) and Gaussian noise."""

from dataclasses import dataclass

import numpy as np

from .proximal import detect_mask
from .radon import Sinogram


@dataclass(frozen=True)
class NoiseSpec:
    """Relative Gaussian noise level and its seed.

    ``reference`` selects what the level is relative to: the sinogram's max
    value (default, the usual convention for synthetic CT studies) or its
    mean.
    """

    relative_level: float = 0.05
    rng_seed: int = 0
    reference: str = "max"

    def __post_init__(self):
        if self.relative_level < 0:
            raise ValueError("relative_level must be non-negative")
        if self.reference not in ("max", "mean"):
            raise ValueError("reference must be 'max' or 'mean'")


def cap_sinogram(sino, cap):
    """Replace entries >= ``cap`` by exactly ``cap``; return (capped, mask).

    Models detector saturation behind dense material: on the mask the true
    value is unknown, only that it reached the threshold.  Idempotent, never
    increases an entry.
    """
    mask = detect_mask(sino.values, cap)
    capped = np.where(mask, cap, sino.values)
    return Sinogram(capped, sino.geometry), mask


def add_noise(sino, spec):
    """Add i.i.d. zero-mean Gaussian noise, std = level * max (or mean).

    Deterministic for a given seed.  In the saturation pipeline, noise is
    added before capping by default (saturation happens at the detector
    after noise).
    """
    if spec.relative_level == 0:
        return Sinogram(sino.values.copy(), sino.geometry)
    ref = sino.values.max() if spec.reference == "max" else sino.values.mean()
    sigma = spec.relative_level * float(ref)
    rng = np.random.default_rng(spec.rng_seed)
    noisy = sino.values + rng.normal(0.0, sigma, sino.values.shape)
    return Sinogram(noisy, sino.geometry)
