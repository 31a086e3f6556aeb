"""Linear scattering, stability and gain-bandwidth analysis of a two-cavity
optomechanical phase-preserving amplifier.

Frequencies and rates are in units of the mechanical frequency.
"""

from .errors import ComputeError, OptoAmpError, ParamError
from .metrics import (
    LorentzianFit,
    PeakMetrics,
    center_frequency,
    compare_params,
    find_peak,
    lorentzian_params,
    lorentzian_vs_numeric,
)
from .model import SystemParams, build_drift_matrix, build_noise_matrix, validate_params
from .oracle import compare_scattering, time_domain_probe
from .scattering import (
    added_noise,
    closed_form_gain,
    coefficient_spectrum,
    coefficients,
    gain_spectrum,
    power_gain,
    scattering_matrix,
    symplectic_defect,
)
from .stability import (
    blue_sideband,
    boundary_g1,
    boundary_g2,
    eigen_spectrum,
    is_stable,
    routh_hurwitz,
    stability_map,
)
from .sweep import extract_contour, sweep_plane, tune_curve

__version__ = "0.1.0"

__all__ = [
    "ComputeError",
    "LorentzianFit",
    "OptoAmpError",
    "ParamError",
    "PeakMetrics",
    "SystemParams",
    "added_noise",
    "blue_sideband",
    "boundary_g1",
    "boundary_g2",
    "build_drift_matrix",
    "build_noise_matrix",
    "center_frequency",
    "closed_form_gain",
    "coefficient_spectrum",
    "coefficients",
    "compare_params",
    "compare_scattering",
    "eigen_spectrum",
    "extract_contour",
    "find_peak",
    "gain_spectrum",
    "is_stable",
    "lorentzian_params",
    "lorentzian_vs_numeric",
    "power_gain",
    "routh_hurwitz",
    "scattering_matrix",
    "stability_map",
    "sweep_plane",
    "symplectic_defect",
    "time_domain_probe",
    "tune_curve",
    "validate_params",
]
