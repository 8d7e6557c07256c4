"""Closed-form resolvents for the dualized data and TV terms.

The data term distinguishes sinogram entries inside the saturation mask
(where only ``A u >= C`` is known) from entries outside it (where the
measured value is trusted, either as a quadratic penalty or as an equality
constraint).  All maps are componentwise and firmly nonexpansive.

``sigma_dual`` below is the step size that multiplies the operator in the
dual update; the same value must be used inside these resolvents.
"""

from dataclasses import dataclass

import numpy as np

MODES = ("unconstrained", "soft", "hard")


@dataclass
class ConstraintSpec:
    """Capped data, its saturation mask and the constraint mode.

    ``data`` holds the capped sinogram values (entries on the mask equal
    ``cap`` exactly, entries off the mask are below it); ``mask`` is True on
    the saturated region.  The unconstrained mode is the degenerate case of
    an empty mask; use ``cap = inf`` when no threshold applies.
    """

    data: np.ndarray
    mask: np.ndarray
    cap: float
    mode: str = "soft"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.data.shape:
            raise ValueError(
                f"mask shape {self.mask.shape} does not match data "
                f"{self.data.shape}")
        if not self.cap > 0:
            raise ValueError("cap threshold must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "unconstrained" and self.mask.any():
            raise ValueError("unconstrained mode requires an empty mask")
        if np.any(self.data[self.mask] != self.cap):
            raise ValueError("capped entries must equal the cap exactly")
        if np.any(self.data[~self.mask] >= self.cap):
            raise ValueError("entries outside the mask must be below the cap")

    @classmethod
    def from_data(cls, values, cap, mode="soft"):
        """Detect the mask from ``values >= cap`` and store the canonical
        capped form (mask entries set to exactly ``cap``).  Only the cap,
        never the original value, enters the iteration on the mask."""
        values = np.asarray(values, dtype=np.float64)
        if mode == "unconstrained":
            cap = np.inf
        mask = detect_mask(values, cap)
        data = np.where(mask, cap, values)
        return cls(data=data, mask=mask, cap=float(cap), mode=mode)

    def scaled(self, scale):
        """The same constraint with data and cap divided by ``scale``."""
        return ConstraintSpec(self.data / scale, self.mask, self.cap / scale,
                              self.mode)


def detect_mask(values, cap):
    """Boolean mask of entries with ``values >= cap``."""
    if not cap > 0:
        raise ValueError("cap threshold must be positive")
    return np.asarray(values, dtype=np.float64) >= cap


def resolvent_data_soft(v_bar, spec, sigma_dual):
    """Resolvent of the dualized soft data term, componentwise.

    Off the mask: ``(v - sigma*U0) / (1 + sigma)`` (quadratic data fit);
    on the mask: ``min(v - sigma*C, 0)`` (one-sided constraint dual).
    """
    if not sigma_dual > 0:
        raise ValueError("sigma_dual must be positive")
    out = (v_bar - sigma_dual * spec.data) / (1.0 + sigma_dual)
    if spec.mask.any():
        capped = np.minimum(v_bar - sigma_dual * spec.cap, 0.0)
        out = np.where(spec.mask, capped, out)
    return out


def resolvent_data_hard(v_bar, spec, sigma_dual):
    """Resolvent of the dualized hard data term, componentwise.

    Off the mask the data fit is an equality constraint, whose conjugate is
    linear: ``v - sigma*U0``.  On the mask: same as the soft variant.
    """
    if not sigma_dual > 0:
        raise ValueError("sigma_dual must be positive")
    out = v_bar - sigma_dual * spec.data
    if spec.mask.any():
        capped = np.minimum(v_bar - sigma_dual * spec.cap, 0.0)
        out = np.where(spec.mask, capped, out)
    return out


def resolvent_tv(w_bar, lam, isotropic=True):
    """Projection of a (2, rows, cols) field onto the radius-``lam`` ball.

    Isotropic (default): per pixel, the 2-vector is shrunk radially by
    ``max(1, |w| / lam)`` with ``|.|`` the Euclidean magnitude.  Anisotropic:
    each component is clamped to ``[-lam, lam]`` independently.
    """
    if not lam > 0:
        raise ValueError("TV weight must be positive")
    w = np.asarray(w_bar, dtype=np.float64)
    if isotropic:
        mag = np.sqrt(w[0] ** 2 + w[1] ** 2)
        return w / np.maximum(1.0, mag / lam)
    return np.clip(w, -lam, lam)
