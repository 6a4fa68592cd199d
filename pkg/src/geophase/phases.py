"""Phase bookkeeping: dynamical/geometric decomposition, holonomies, 1/xi fits.

Sign convention: a state that picks up the factor exp(-i gamma) reports the
phase +gamma. The dynamical phase is the integral of <psi|H|psi>, so an
eigenstate of energy E held for time t reports gamma = E t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .numkernel import check_normalized, expm_i, overlap
from .operators import SpinRepresentation, TripodGenerators, spin_representation
from .propagate import PropagationConfig, Trajectory, evaluate_hamiltonian, adiabatic_eigenstate_track, propagate
from .pulses import FieldPath

CYCLIC_TOL = 0.01
ADIABATIC_MIN = 50.0


def wrap_phase(phi):
    """Map angles into (-pi, pi]."""
    out = np.mod(np.asarray(phi, dtype=float) + np.pi, 2 * np.pi) - np.pi
    out = np.where(out <= -np.pi, out + 2 * np.pi, out)
    return float(out) if np.ndim(out) == 0 else out


def unwrap_against(principal: float, reference: float) -> float:
    """The branch of `principal` (mod 2 pi) closest to `reference`."""
    return reference + wrap_phase(principal - reference)


@dataclass(frozen=True)
class PhaseDecomposition:
    total: float
    dynamical: float
    geometric: float
    cyclicity_defect: float

    @property
    def cyclic(self) -> bool:
        return self.cyclicity_defect <= CYCLIC_TOL


def phase_decomposition(traj: Trajectory, psi0) -> PhaseDecomposition:
    """Split the return phase of `traj` relative to `psi0`.

    The endpoint phase -arg<psi0|psi(T)> is only known mod 2 pi; its branch is
    taken closest to the phase accumulated step by step along the run, which
    resolves the large multiples of 2 pi that long dynamical phases produce.
    The geometric part is whatever remains after subtracting the dynamical
    integral.
    """
    if len(traj) == 0:
        raise InvalidInputError("empty trajectory")
    psi0 = check_normalized(psi0)
    amp = overlap(psi0, traj.final_state)
    defect = float(min(max(1.0 - abs(amp), 0.0), 1.0))
    total = unwrap_against(-np.angle(amp), float(traj.accumulated_phase[-1]))
    dynamical = float(traj.accumulated_dynamical_phase[-1])
    return PhaseDecomposition(total, dynamical, total - dynamical, defect)


def field_path_hamiltonian(rep: SpinRepresentation, path: FieldPath):
    gens = np.stack([rep.jx, rep.jy, rep.jz])

    def source(times):
        return np.einsum("na,aij->nij", path.omega_array(times), gens)

    return source


def spin_berry_phase(J, m, path: FieldPath, cfg: PropagationConfig) -> PhaseDecomposition:
    """Propagate |J, m_z = m> around `path` and decompose its return phase."""
    rep = spin_representation(J)
    if abs(m) > rep.J + 1e-12:
        raise InvalidInputError(f"|m| must not exceed J={rep.J}, got m={m}")
    shortest = min(d for _, _, d in path.segments)
    if path.omega_magnitude * shortest < ADIABATIC_MIN:
        warnings.warn(
            f"Omega*segment_duration = {path.omega_magnitude * shortest:.3g} < {ADIABATIC_MIN}; "
            "evolution may not be adiabatic",
            stacklevel=2,
        )
    psi0 = rep.state(m)
    traj = propagate(field_path_hamiltonian(rep, path), psi0, path.window, cfg)
    return phase_decomposition(traj, psi0)


def rotation_composition_check(generators) -> float:
    """Max entrywise |e^{-i pi/2 Jx} e^{-i pi/2 Jz} e^{-i pi/2 Jy} - e^{-i pi/2 Jz}|.

    `generators` is a SpinRepresentation, a TripodGenerators (checked on
    J(1) + J(2)), or any (Jx, Jy, Jz) triple.
    """
    if isinstance(generators, SpinRepresentation):
        jx, jy, jz = generators.jx, generators.jy, generators.jz
    elif isinstance(generators, TripodGenerators):
        jx, jy, jz = generators.total()
    else:
        jx, jy, jz = generators
    q = np.pi / 2
    lhs = expm_i(jx, q) @ expm_i(jz, q) @ expm_i(jy, q)
    return float(np.max(np.abs(lhs - expm_i(jz, q))))


@dataclass(frozen=True)
class HolonomyResult:
    """Holonomy of a closed adiabatic loop on a degenerate eigenspace.

    `holonomy[i, j] = <b_i(0)|b_j(T)>` in the tracked initial basis; a state
    with coefficient vector c ends with coefficients holonomy @ c.
    `eigenphases` are arg of its eigenvalues in (-pi, pi]; by the sign
    convention above the geometric phase of each eigenvector is minus its
    eigenphase.
    """

    holonomy: np.ndarray
    eigenphases: np.ndarray
    eigenvectors: np.ndarray
    initial_basis: np.ndarray

    @property
    def geometric_phases(self) -> np.ndarray:
        return -self.eigenphases

    @property
    def operator(self) -> np.ndarray:
        """Holonomy as an operator on the full space (zero off the subspace)."""
        b = self.initial_basis
        return b @ self.holonomy @ b.conj().T

    def matrix_in(self, vectors) -> np.ndarray:
        """Holonomy matrix in a user-chosen orthonormal basis of the subspace."""
        w = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        return w.conj().T @ self.operator @ w


def holonomy_from_track(initial: np.ndarray, final: np.ndarray) -> HolonomyResult:
    hol = initial.conj().T @ final
    vals, vecs = np.linalg.eig(hol)
    phases = wrap_phase(np.angle(vals))
    phases = np.atleast_1d(phases)
    order = np.argsort(phases)
    return HolonomyResult(hol, phases[order], initial @ vecs[:, order], initial)


def wilczek_zee_holonomy(hamiltonian, subspace_energy: float, window, cfg: PropagationConfig) -> HolonomyResult:
    """Parallel-transport the eigenspace at `subspace_energy` around a closed loop."""
    ends = evaluate_hamiltonian(hamiltonian, np.array([float(window[0]), float(window[1])]))
    scale = max(np.max(np.abs(ends)), 1.0)
    if np.max(np.abs(ends[0] - ends[1])) > 1e-6 * scale:
        raise InvalidInputError("path is not closed: H(t_start) != H(t_end)")
    track = adiabatic_eigenstate_track(hamiltonian, subspace_energy, window, cfg)
    return holonomy_from_track(track.initial, track.final)


@dataclass(frozen=True)
class InverseXiFit:
    c: float
    r_squared: float
    offset: float = 0.0

    def predict(self, xi):
        return self.c / np.asarray(xi, dtype=float) + self.offset


def fit_inverse_xi(points, with_offset: bool = False) -> InverseXiFit:
    """Least-squares fit of phase = c/xi (optionally + offset)."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise InvalidInputError("need at least 3 (xi, phase) points")
    xi, phase = pts[:, 0], pts[:, 1]
    if np.any(xi <= 0):
        raise InvalidInputError("all xi must be positive")
    x = 1.0 / xi
    if with_offset:
        design = np.column_stack([x, np.ones_like(x)])
        (c, d), *_ = np.linalg.lstsq(design, phase, rcond=None)
    else:
        c, d = float(np.dot(x, phase) / np.dot(x, x)), 0.0
    resid = phase - (c * x + d)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.sum((phase - phase.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    return InverseXiFit(float(c), float(r2), float(d))
