"""Metal artifact reduction for CT by constrained total-variation reconstruction.

The package simulates saturated (capped) sinogram data behind dense metal,
then reconstructs with a Chambolle-Pock primal-dual iteration that treats
the capped region as a pointwise inequality constraint instead of trusting
the corrupted values.
"""

from .phantom import Image, MetalInsert, shepp_logan, add_metal
from .radon import Geometry, Sinogram, RadonOperator, project, backproject, \
    estimate_norm, normalized_operator
from .diffops import gradient, divergence, gradient_norm_bound
from .proximal import ConstraintSpec, detect_mask, resolvent_data_soft, \
    resolvent_data_hard, resolvent_tv
from .solver import SolverConfig, Diagnostics, DiagnosticsRecord, \
    ConfigurationError, DivergenceError, validate_steps, suggested_step, \
    solve, primal_objective
from .degrade import NoiseSpec, cap_sinogram, add_noise
from .metrics import fbp_baseline, psnr

__all__ = [
    "Image", "MetalInsert", "shepp_logan", "add_metal",
    "Geometry", "Sinogram", "RadonOperator", "project", "backproject",
    "estimate_norm", "normalized_operator",
    "gradient", "divergence", "gradient_norm_bound",
    "ConstraintSpec", "detect_mask", "resolvent_data_soft",
    "resolvent_data_hard", "resolvent_tv",
    "SolverConfig", "Diagnostics", "DiagnosticsRecord",
    "ConfigurationError", "DivergenceError", "validate_steps",
    "suggested_step", "solve", "primal_objective",
    "NoiseSpec", "cap_sinogram", "add_noise",
    "fbp_baseline", "psnr",
]

__version__ = "0.1.0"
