"""Adiabatic geometric phases without dynamical phases: spin-J loops, the
SU(2)xSU(2) tripod, and a dipole-coupled two-particle phase gate."""

from .errors import (
    ConfigurationError,
    DegeneracyCrossingError,
    GeophaseError,
    InvalidInputError,
    NumericalError,
    OutOfRangeError,
)
from .numkernel import expm_i, hermitian_eigensystem, overlap
from .operators import (
    SpinRepresentation,
    TripodGenerators,
    TwoParticleModel,
    logical_basis,
    spin_hamiltonian,
    spin_representation,
    tripod_generators,
    tripod_hamiltonian,
    two_particle_hamiltonian,
)
from .phases import (
    HolonomyResult,
    PhaseDecomposition,
    fit_inverse_xi,
    phase_decomposition,
    rotation_composition_check,
    spin_berry_phase,
    wilczek_zee_holonomy,
)
from .propagate import PropagationConfig, Trajectory, adiabatic_eigenstate_track, propagate
from .pulses import FieldPath, GaussianPulse, PulseSequence, fig1_path, full_cycle, half_cycle

__version__ = "0.1.0"
