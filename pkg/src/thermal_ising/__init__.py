"""Finite-temperature Ising twist-field correlators via inverse scattering.

Submodules: ``specfn`` (thermal special functions), ``scattering`` (closed
form scattering data), ``form_factors`` (circle form-factor series),
``linear_problem`` (forward scattering of a field profile), ``glm`` (kernels,
Volterra solver, reconstruction), ``asymptotics`` (near-light-cone series)
and ``cli``.
"""
from .errors import (BranchAmbiguity, BranchError, ConvergenceError, DomainError,
                     NearSingularity, NonDecayedProfile, OscillationBudgetExceeded, PoleError,
                     PrecisionLoss, RegimeWarning, SingularMatrix, StepSizeError, TailTooLarge,
                     ThermalIsingError, TruncationError, ValidityError)
from .specfn import QuadratureConfig, SpectralPoint, ThermalParams
from .scattering import ScatteringData, jost_a, jost_b
from .form_factors import CircleModeSet, TruncationPolicy, correlator_equal_time, phi_equal_time
from .linear_problem import FieldProfile, integrate_jost_plus, scatter_check
from .glm import (kernel_bessel_series, kernel_direct, kernel_residue_sum, neumann_orders,
                  reconstruct_phi, volterra_solve)
from .asymptotics import (LightconeCoords, correlators_lightcone, phi_lightcone,
                          series_coefficients, verify_ansatz_system, xi_solution_check)

__version__ = "0.1.0"

__all__ = [
    "BranchAmbiguity", "BranchError", "ConvergenceError", "DomainError", "NearSingularity",
    "NonDecayedProfile", "OscillationBudgetExceeded", "PoleError", "PrecisionLoss",
    "RegimeWarning", "SingularMatrix", "StepSizeError", "TailTooLarge", "ThermalIsingError",
    "TruncationError", "ValidityError",
    "QuadratureConfig", "SpectralPoint", "ThermalParams", "ScatteringData", "jost_a", "jost_b",
    "CircleModeSet", "TruncationPolicy", "correlator_equal_time", "phi_equal_time",
    "FieldProfile", "integrate_jost_plus", "scatter_check",
    "kernel_bessel_series", "kernel_direct", "kernel_residue_sum", "neumann_orders",
    "reconstruct_phi", "volterra_solve",
    "LightconeCoords", "correlators_lightcone", "phi_lightcone", "series_coefficients",
    "verify_ansatz_system", "xi_solution_check",
]
