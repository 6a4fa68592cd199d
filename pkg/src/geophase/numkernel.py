"""Dense complex linear algebra for small Hermitian problems.

State vectors and operators are plain numpy arrays. The helpers here validate
the invariants the rest of the package relies on (Hermiticity, unitarity,
normalization) and provide the eigendecomposition-based exponential used by
every propagator.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-9


def as_vector(v) -> np.ndarray:
    """Return `v` as a 1-d complex array, rejecting empty input."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    return arr


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return `m` as a Hermitian matrix.

    Real symmetric input stays real so downstream eigensolvers can take the
    cheaper real path.
    """
    arr = np.asarray(m)
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InvalidInputError("matrix has dimension 0")
    dev = np.max(np.abs(arr - arr.conj().T))
    if dev > tol:
        raise InvalidInputError(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")
    return arr


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def norm(v) -> float:
    return float(np.linalg.norm(as_vector(v)))


def check_normalized(v, tol: float = NORM_TOL) -> np.ndarray:
    arr = as_vector(v)
    n = np.linalg.norm(arr)
    if abs(n - 1.0) > tol:
        raise InvalidInputError(f"state is not normalized (norm = {n:.12g})")
    return arr


def hermitian_eigensystem(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of `m`."""
    arr = as_hermitian(m)
    # eigh already returns ascending eigenvalues; ties keep LAPACK's order
    w, v = np.linalg.eigh(arr)
    return w, v.astype(complex)


def expm_i(m, t: float) -> np.ndarray:
    """Return exp(-i m t) for Hermitian `m`."""
    if not np.isfinite(t):
        raise InvalidInputError(f"duration must be finite, got {t!r}")
    w, v = hermitian_eigensystem(m)
    if t == 0:
        return np.eye(len(w), dtype=complex)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expm_i_batch(ms: np.ndarray, dt: float) -> np.ndarray:
    """Stacked exp(-i m_k dt) for an array of Hermitian matrices of shape (n, d, d).

    No validation; this is the propagator hot path.
    """
    if not np.iscomplexobj(ms) or not np.any(ms.imag):
        ms = np.real(ms)
    w, v = np.linalg.eigh(ms)
    v = v.astype(complex, copy=False)
    return (v * np.exp(-1j * w * dt)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


def overlap(a, b) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def basis_vector(dim: int, index: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e
