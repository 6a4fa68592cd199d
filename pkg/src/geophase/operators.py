"""Operators: spin-J matrices, the SU(2)xSU(2) tripod generators, and the
rotating-frame Hamiltonian of two dipole-coupled particles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError
from .numkernel import as_hermitian, commutator

MAX_SPIN = 8

# Tripod levels are labelled 1..4; level 1 is the common (excited) state.
TRIPOD_DIM = 4


def tripod_state(label: int) -> np.ndarray:
    """Basis vector of tripod level `label` (1-based, as in the level diagram)."""
    if label not in (1, 2, 3, 4):
        raise InvalidInputError(f"tripod level must be 1..4, got {label!r}")
    e = np.zeros(TRIPOD_DIM, dtype=complex)
    e[label - 1] = 1.0
    return e


def _finite_omega(omega) -> np.ndarray:
    om = np.asarray(omega, dtype=float)
    if om.shape != (3,):
        raise InvalidInputError(f"omega must be a 3-vector, got shape {om.shape}")
    if not np.all(np.isfinite(om)):
        raise InvalidInputError(f"omega must be finite, got {om}")
    return om


@dataclass(frozen=True)
class SpinRepresentation:
    J: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (J, J-1, ..., -J)."""
        return np.real(np.diag(self.jz))

    def index_of(self, m: float) -> int:
        idx = np.flatnonzero(np.isclose(self.m_values, m, atol=1e-9))
        if idx.size != 1:
            raise InvalidInputError(f"m={m} is not a valid projection for J={self.J}")
        return int(idx[0])

    def state(self, m: float) -> np.ndarray:
        """|J, m_z = m>."""
        e = np.zeros(self.dim, dtype=complex)
        e[self.index_of(m)] = 1.0
        return e


def spin_representation(J) -> SpinRepresentation:
    """Angular-momentum matrices for total spin `J` in the |J, m> basis, m descending."""
    try:
        two_j = Fraction(J) * 2
    except (TypeError, ValueError):
        raise InvalidInputError(f"J must be a half-integer, got {J!r}") from None
    if two_j.denominator != 1 or two_j < 0:
        raise InvalidInputError(f"J must be a non-negative half-integer, got {J!r}")
    if two_j > 2 * MAX_SPIN:
        raise InvalidInputError(f"J={J} exceeds the supported maximum {MAX_SPIN}")
    j = float(two_j) / 2
    m = j - np.arange(int(two_j) + 1)
    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1)) sits on the first superdiagonal
    jplus = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    jminus = jplus.conj().T
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    jz = np.diag(m).astype(complex)
    return SpinRepresentation(J=j, jx=jx, jy=jy, jz=jz)


def spin_hamiltonian(rep: SpinRepresentation, omega) -> np.ndarray:
    """Omega . J for a field vector `omega` (units of angular frequency)."""
    ox, oy, oz = _finite_omega(omega)
    return ox * rep.jx + oy * rep.jy + oz * rep.jz


@dataclass(frozen=True)
class TripodGenerators:
    j1x: np.ndarray
    j1y: np.ndarray
    j1z: np.ndarray
    j2x: np.ndarray
    j2y: np.ndarray
    j2z: np.ndarray

    @property
    def first(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.j1x, self.j1y, self.j1z

    @property
    def second(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.j2x, self.j2y, self.j2z

    def difference(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Components of J(1) - J(2), the generator of the tripod coupling."""
        return tuple(a - b for a, b in zip(self.first, self.second))

    def total(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Components of J(1) + J(2)."""
        return tuple(a + b for a, b in zip(self.first, self.second))

    def algebra_residual(self) -> float:
        """Largest violation of the two commuting su(2) algebras."""
        eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1}
        worst = 0.0
        for gens in (self.first, self.second):
            for i in range(3):
                for j in range(3):
                    expected = np.zeros((4, 4), dtype=complex)
                    for k in range(3):
                        sign = eps.get((i, j, k), 0) - eps.get((j, i, k), 0)
                        expected = expected + 1j * sign * gens[k]
                    worst = max(worst, np.max(np.abs(commutator(gens[i], gens[j]) - expected)))
        for a in self.first:
            for b in self.second:
                worst = max(worst, np.max(np.abs(commutator(a, b))))
        return float(worst)


def tripod_generators() -> TripodGenerators:
    """The six 4x4 generators of two commuting spin-1/2 algebras.

    Entries are the literal matrices whose difference J(1) - J(2) reproduces
    the tripod coupling matrix.
    """
    i = 1j
    j1x = 0.5 * np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -i], [0, 0, i, 0]], dtype=complex)
    j2x = 0.5 * np.array([[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -i], [0, 0, i, 0]], dtype=complex)
    j1y = 0.5 * np.array([[0, 0, 1, 0], [0, 0, 0, i], [1, 0, 0, 0], [0, -i, 0, 0]], dtype=complex)
    j2y = 0.5 * np.array([[0, 0, -1, 0], [0, 0, 0, i], [-1, 0, 0, 0], [0, -i, 0, 0]], dtype=complex)
    j1z = 0.5 * np.array([[0, 0, 0, 1], [0, 0, -i, 0], [0, i, 0, 0], [1, 0, 0, 0]], dtype=complex)
    j2z = 0.5 * np.array([[0, 0, 0, -1], [0, 0, -i, 0], [0, i, 0, 0], [-1, 0, 0, 0]], dtype=complex)
    gens = TripodGenerators(j1x, j1y, j1z, j2x, j2y, j2z)
    for g in (j1x, j1y, j1z, j2x, j2y, j2z):
        as_hermitian(g)
    residual = gens.algebra_residual()
    if residual > 1e-12:
        raise AssertionError(f"tripod generators violate su(2)+su(2) algebra: {residual:.3e}")
    return gens


def tripod_hamiltonian(omega) -> np.ndarray:
    """Tripod coupling: level 1 couples to levels 2, 3, 4 with Omega_x, Omega_y, Omega_z."""
    om = _finite_omega(omega)
    h = np.zeros((4, 4))
    h[0, 1:] = om
    h[1:, 0] = om
    return h


# Rotating-frame two-particle basis; index 0..2 form the degenerate lower
# tripod levels, |aa> is the common level and |bb>, |db> the leakage manifold.
TWO_PARTICLE_BASIS = ("ba", "da", "ab", "aa", "bb", "db")
LEAKAGE_STATES = ("bb", "db")

# two-particle label -> tripod level
TRIPOD_EMBEDDING = {"aa": 1, "ba": 2, "da": 3, "ab": 4}

# (state, state, field axis) for every coupling that survives in the closed
# six-state space; first three are the resonant tripod couplings.
_COUPLINGS = (
    ("ba", "aa", 0),
    ("da", "aa", 1),
    ("ab", "aa", 2),
    ("ba", "bb", 2),
    ("ab", "bb", 0),
    ("ab", "db", 1),
    ("da", "db", 2),
)


@dataclass(frozen=True)
class TwoParticleModel:
    """Two particles with levels a, b, c, d and a dipole shift `xi` on |aa>.

    `mu` is the single-particle a-level splitting; it drops out in the
    rotating frame and is kept only for bookkeeping.
    """

    xi: float
    mu: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise InvalidInputError(f"xi must be positive and finite, got {self.xi!r}")

    @property
    def basis(self) -> tuple[str, ...]:
        return TWO_PARTICLE_BASIS

    @staticmethod
    def index(label: str) -> int:
        return TWO_PARTICLE_BASIS.index(label)

    @staticmethod
    def state(label: str) -> np.ndarray:
        e = np.zeros(len(TWO_PARTICLE_BASIS), dtype=complex)
        e[TWO_PARTICLE_BASIS.index(label)] = 1.0
        return e


def two_particle_hamiltonian(model: TwoParticleModel, omega) -> np.ndarray:
    """6x6 rotating-frame Hamiltonian on (|ba>, |da>, |ab>, |aa>, |bb>, |db>).

    The leakage states |bb>, |db> sit at +xi. Flipping that sign maps every
    amplitude to its complex conjugate, so only the sign of the residual
    ac-Stark phase depends on the convention.
    """
    om = _finite_omega(omega)
    idx = {s: k for k, s in enumerate(TWO_PARTICLE_BASIS)}
    h = np.zeros((6, 6))
    for s1, s2, axis in _COUPLINGS:
        h[idx[s1], idx[s2]] = h[idx[s2], idx[s1]] = om[axis]
    for s in LEAKAGE_STATES:
        h[idx[s], idx[s]] = model.xi
    return h


def two_particle_hamiltonian_batch(model: TwoParticleModel, omegas: np.ndarray) -> np.ndarray:
    """Vectorized two_particle_hamiltonian for omegas of shape (n, 3)."""
    omegas = np.asarray(omegas, dtype=float)
    idx = {s: k for k, s in enumerate(TWO_PARTICLE_BASIS)}
    h = np.zeros((omegas.shape[0], 6, 6))
    for s1, s2, axis in _COUPLINGS:
        h[:, idx[s1], idx[s2]] = omegas[:, axis]
        h[:, idx[s2], idx[s1]] = omegas[:, axis]
    for s in LEAKAGE_STATES:
        h[:, idx[s], idx[s]] = model.xi
    return h


def tripod_hamiltonian_batch(omegas: np.ndarray) -> np.ndarray:
    omegas = np.asarray(omegas, dtype=float)
    h = np.zeros((omegas.shape[0], 4, 4))
    h[:, 0, 1:] = omegas
    h[:, 1:, 0] = omegas
    return h


@dataclass(frozen=True)
class LogicalState:
    label: str
    product_state: str
    coupled: bool

    @property
    def index(self) -> int | None:
        """Position in the six-state coupled basis, None for spectators."""
        if self.product_state in TWO_PARTICLE_BASIS:
            return TWO_PARTICLE_BASIS.index(self.product_state)
        return None


def logical_basis() -> dict[str, LogicalState]:
    """Qubit encoding: A uses (|c>, |b>), B uses (|c>, |a>).

    Only 11 = |ba> is resonantly driven. The other three states contain a
    particle in |c>, which no field addresses, and are treated as spectators
    with unit amplitude. For 01 = |ca> the Omega_z field does reach particle B,
    but only off-resonantly (detuned by xi); that shift is neglected here.
    """
    return {
        "00": LogicalState("00", "cc", False),
        "01": LogicalState("01", "ca", False),
        "10": LogicalState("10", "bc", False),
        "11": LogicalState("11", "ba", True),
    }
