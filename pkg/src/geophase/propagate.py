"""Unitary propagation of i dpsi/dt = H(t) psi and adiabatic subspace tracking.

A Hamiltonian source is any callable mapping an array of times of shape (n,)
to stacked matrices of shape (n, d, d). Plain callables that only accept a
scalar time also work; they are evaluated point by point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegeneracyCrossingError, InvalidInputError, NumericalError
from .numkernel import NORM_TOL, check_normalized, expm_i_batch

CHUNK = 4096
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class PropagationConfig:
    step: float = 0.5
    record_stride: int = 1
    convergence_check: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise ConfigurationError(f"step must be positive and finite, got {self.step!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigurationError(f"record_stride must be a positive integer, got {self.record_stride!r}")

    def check_resolves(self, min_width: float, max_rate: float | None = None) -> None:
        """Reject steps too coarse for the narrowest pulse.

        With `convergence_check` the step must also satisfy h <= 0.5/max_rate,
        where max_rate is the largest coupling or detuning in the problem.
        """
        if np.isfinite(min_width) and self.step > min_width / 20 + 1e-15:
            raise ConfigurationError(
                f"step {self.step} exceeds width/20 = {min_width / 20} of the narrowest pulse"
            )
        if self.convergence_check and max_rate and self.step > 0.5 / max_rate + 1e-15:
            raise ConfigurationError(
                f"step {self.step} exceeds 0.5/max_rate = {0.5 / max_rate} required for convergence checks"
            )


def default_step(width: float) -> float:
    return width / 40


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of a propagation run.

    `accumulated_dynamical_phase` is the running integral of <psi|H|psi>.
    `accumulated_phase` is the running sum of -arg<psi(t_k)|psi(t_k+1)> over
    every integration step; it tracks the phase continuously through many
    multiples of 2 pi and serves as the branch reference when reading phases.
    """

    times: np.ndarray
    states: np.ndarray
    energy_expectations: np.ndarray
    accumulated_dynamical_phase: np.ndarray
    accumulated_phase: np.ndarray
    step: float

    def __post_init__(self):
        for name in ("times", "states", "energy_expectations", "accumulated_dynamical_phase", "accumulated_phase"):
            getattr(self, name).setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def state_at(self, t: float) -> np.ndarray:
        """Recorded state closest to time `t`."""
        return self.states[int(np.argmin(np.abs(self.times - t)))]


def constant_hamiltonian(h):
    h = np.asarray(h)

    def source(times):
        times = np.atleast_1d(times)
        return np.broadcast_to(h, times.shape + h.shape)

    return source


def evaluate_hamiltonian(source, times: np.ndarray, dim: int | None = None) -> np.ndarray:
    try:
        hs = np.asarray(source(times))
    except (TypeError, ValueError):
        hs = None
    if hs is None or hs.ndim != 3 or hs.shape[0] != len(times):
        hs = np.array([np.asarray(source(float(t))) for t in times])
    if dim is not None and hs.shape[1:] != (dim, dim):
        raise InvalidInputError(f"Hamiltonian has shape {hs.shape[1:]}, state has dimension {dim}")
    return hs


def _grid(window, step: float) -> tuple[float, float, int]:
    t0, t1 = float(window[0]), float(window[1])
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 < t0:
        raise InvalidInputError(f"invalid window {window!r}")
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    return t0, t1, n


def propagate(hamiltonian, psi0, window, cfg: PropagationConfig) -> Trajectory:
    """Midpoint-exponential integration: psi_k+1 = exp(-i H(t_k + h/2) h) psi_k.

    The step is shrunk slightly so that an integer number of steps spans the
    window exactly. The dynamical phase integral uses <psi_k|H_mid|psi_k> h,
    which is exact for the piecewise-constant Hamiltonian being integrated.
    """
    psi = check_normalized(psi0).copy()
    dim = psi.size
    t0, t1, n = _grid(window, cfg.step)
    h = (t1 - t0) / n if t1 > t0 else 0.0
    stride = int(cfg.record_stride)

    record_idx = list(range(0, n + 1, stride))
    if record_idx[-1] != n:
        record_idx.append(n)
    record_idx = np.array(record_idx)
    rec_states = np.empty((len(record_idx), dim), dtype=complex)
    rec_dyn = np.empty(len(record_idx))
    rec_phase = np.empty(len(record_idx))
    rec_states[0] = psi
    rec_dyn[0] = rec_phase[0] = 0.0
    rec_pos = 1

    dyn = 0.0
    acc = 0.0
    for start in range(0, n, CHUNK):
        m = min(CHUNK, n - start)
        mids = t0 + (start + np.arange(m) + 0.5) * h
        hs = evaluate_hamiltonian(hamiltonian, mids, dim)
        us = expm_i_batch(hs, h)
        chunk = np.empty((m + 1, dim), dtype=complex)
        chunk[0] = psi
        for k in range(m):
            chunk[k + 1] = us[k] @ chunk[k]
        psi = chunk[-1]
        if not np.all(np.isfinite(psi)):
            raise NumericalError(f"propagation diverged near t={mids[-1]:.6g}")
        energies = np.real(np.einsum("ki,kij,kj->k", chunk[:-1].conj(), hs, chunk[:-1]))
        dyn_run = dyn + np.cumsum(energies) * h
        step_ovl = np.einsum("ki,ki->k", chunk[:-1].conj(), chunk[1:])
        acc_run = acc - np.cumsum(np.angle(step_ovl))
        dyn, acc = dyn_run[-1], acc_run[-1]
        while rec_pos < len(record_idx) and record_idx[rec_pos] <= start + m:
            j = record_idx[rec_pos] - start
            rec_states[rec_pos] = chunk[j]
            rec_dyn[rec_pos] = dyn_run[j - 1]
            rec_phase[rec_pos] = acc_run[j - 1]
            rec_pos += 1

    times = t0 + record_idx * h
    energy_exp = np.empty(len(times))
    for start in range(0, len(times), CHUNK):
        sl = slice(start, start + CHUNK)
        hs = evaluate_hamiltonian(hamiltonian, times[sl], dim)
        energy_exp[sl] = np.real(np.einsum("ki,kij,kj->k", rec_states[sl].conj(), hs, rec_states[sl]))

    norms = np.linalg.norm(rec_states, axis=1)
    worst = np.max(np.abs(norms - 1.0))
    if worst > NORM_TOL:
        raise NumericalError(f"norm drifted by {worst:.3e}")
    return Trajectory(times, rec_states, energy_exp, rec_dyn, rec_phase, h)


@dataclass(frozen=True)
class TrackedSubspace:
    """Parallel-transported orthonormal basis of an eigen-subspace.

    `bases[k]` has shape (d, r); its columns span the eigenspace at
    `times[k]` with the gauge fixed by maximal overlap with the previous
    sample.
    """

    times: np.ndarray
    bases: np.ndarray
    energy: float

    @property
    def dim(self) -> int:
        return self.bases.shape[2]

    @property
    def initial(self) -> np.ndarray:
        return self.bases[0]

    @property
    def final(self) -> np.ndarray:
        return self.bases[-1]


def _select(w: np.ndarray, v: np.ndarray, energy: float) -> np.ndarray:
    scale = max(np.max(np.abs(w)), 1.0)
    return v[:, np.abs(w - energy) <= DEGENERACY_TOL * scale]


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def adiabatic_eigenstate_track(hamiltonian, subspace_energy: float, window, cfg: PropagationConfig) -> TrackedSubspace:
    """Follow the eigenspace at `subspace_energy` by discrete parallel transport.

    At each grid time the previous basis is projected onto the new eigenspace
    and re-orthonormalized (polar factor), which removes any gauge rotation
    within the subspace.
    """
    t0, t1, n = _grid(window, cfg.step)
    h = (t1 - t0) / n if t1 > t0 else 0.0
    stride = int(cfg.record_stride)
    grid = t0 + np.arange(n + 1) * h

    h0 = evaluate_hamiltonian(hamiltonian, grid[:1])[0]
    w, v = np.linalg.eigh(h0)
    basis = _select(w, v.astype(complex), subspace_energy)
    r = basis.shape[1]
    if r == 0:
        raise InvalidInputError(f"no eigenvalue at energy {subspace_energy} at t={t0}")

    keep = [0]
    out = [basis]
    for start in range(1, n + 1, CHUNK):
        ts = grid[start : start + CHUNK]
        hs = evaluate_hamiltonian(hamiltonian, ts)
        if not np.iscomplexobj(hs) or not np.any(hs.imag):
            hs = np.real(hs)
        ws, vs = np.linalg.eigh(hs)
        for j, t in enumerate(ts):
            cur = _select(ws[j], vs[j].astype(complex), subspace_energy)
            if cur.shape[1] != r:
                raise DegeneracyCrossingError(t, r, cur.shape[1])
            basis = cur @ _polar_unitary(cur.conj().T @ basis)
            k = start + j
            if k % stride == 0 or k == n:
                keep.append(k)
                out.append(basis)
    return TrackedSubspace(grid[keep], np.array(out), float(subspace_energy))
