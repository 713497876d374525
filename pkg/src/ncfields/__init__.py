"""Deformed symplectic structures for noncommutative scalar and chiral-boson fields.

Submodules
----------
symplectic_core
    Canonical and deformed forms, dressing maps, commutator kernels.
spectra
    Mode Hamiltonians, closed-form and eigensolver frequencies.
dynamics
    Exact and implicit-midpoint evolution, spectral peak extraction.
chiral_edge
    Chiral velocities, coupled edges, exchange phases, filling factors,
    nonlinear edge dispersion.
cli
    The ``ncfields`` command.
"""

from .chiral_edge import (
    ChiralModel,
    CoupledEdgeModel,
    FillingResult,
    JainResult,
    build_omega_general,
    chiral_velocities,
    coupled_edge_eigen,
    deformed_bracket_delta,
    edge_metric,
    filling_factor,
    jain_theta_bar,
    kac_moody_map,
    nonlinear_dispersion,
    shifted_field_map,
    statistical_phase,
)
from .dynamics import Trajectory, exact_evolve, frequency_extract, midpoint_evolve
from .errors import InvalidModelError, StepFailureError
from .spectra import (
    SpectrumResult,
    closed_form_spectrum,
    hamiltonian_matrix,
    oracle_spectrum,
)
from .symplectic_core import (
    DeformationKind,
    DeformationParams,
    DressingMap,
    SymplecticMatrix,
    build_canonical_form,
    build_deformed_form,
    commutator_kernel,
    dressing_map,
    quantum_commutator_matrix,
)

__version__ = "0.1.0"
