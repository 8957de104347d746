"""Numerics for a contact isotopy of the unit-capacity sphere: the projected disk
flow, its cut-off and limit versions, and the certification pipeline."""

from .construction import (
    CertificationReport,
    DisplacingIsotopy,
    build_gamma,
    build_kappa,
    certify,
    compose_psi,
    translated_point_search,
)
from .cutoff import (
    HamiltonianSchedule,
    SmoothingProfile,
    StripStart,
    integrate_cutoff,
    scaling_exponent_cutoff,
    shelukhin_length,
    sigma_set,
)
from .disk import DiskPoint, StripPoint, arc_C, boundary_trajectory, exact_flow, p_integral
from .piecewise import classify_crossing, convergence_test, integrate_piecewise, scaling_exponent_piecewise
from .sphere import SpherePoint, TangentVector

__version__ = "0.1.0"
