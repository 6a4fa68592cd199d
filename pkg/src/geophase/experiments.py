"""Experiment runners: spin Berry phase demo, tripod loops, and the two-particle gate.

Each runner takes an ExperimentConfig and returns a small report object with
a `summary()` dict; the CLI turns those into CSV files and KEY=VALUE lines.
"""

from __future__ import annotations

import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .operators import (
    TwoParticleModel,
    logical_basis,
    spin_representation,
    tripod_hamiltonian_batch,
    tripod_state,
    two_particle_hamiltonian_batch,
)
from .phases import (
    PhaseDecomposition,
    fit_inverse_xi,
    phase_decomposition,
    spin_berry_phase,
    unwrap_against,
    wilczek_zee_holonomy,
)
from .propagate import PropagationConfig, Trajectory, default_step, propagate
from .pulses import (
    DEFAULT_ALPHA,
    DEFAULT_FIRST_CENTER,
    DEFAULT_HALF_CYCLE_CENTERS,
    DEFAULT_WIDTH,
    FULL_CYCLE_AXES,
    GaussianPulse,
    PulseSequence,
    cycle_sequence,
    default_spacing,
    fig1_path,
    full_cycle,
    half_cycle,
)

EXPERIMENTS = ("spin-demo", "tripod-cycle", "tripod-double", "gate-half", "gate-full", "xi-scan", "robustness")
DEFAULT_XI_LIST = (4.0, 8.0, 16.0, 32.0, 64.0)
MAX_JITTER = 0.3
LEAKAGE_WARN = 0.05
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

TRIPOD_INITIAL_STATES = ("2", "3", "plus", "minus")


def tripod_initial_state(label: str) -> np.ndarray:
    """'2', '3', or the dark superpositions 'plus' = (|3>+i|2>)/sqrt2, 'minus' = (|3>-i|2>)/sqrt2."""
    if label == "2":
        return tripod_state(2)
    if label == "3":
        return tripod_state(3)
    if label in ("plus", "minus"):
        sign = 1 if label == "plus" else -1
        return (tripod_state(3) + sign * 1j * tripod_state(2)) / np.sqrt(2)
    raise InvalidInputError(f"initial state must be one of {TRIPOD_INITIAL_STATES}, got {label!r}")


@dataclass(frozen=True)
class JitterSpec:
    """Relative half-widths of the uniform multiplicative jitter.

    Timing jitter shifts each centre by up to `timing` times the nominal
    pulse spacing, so it is independent of where t = 0 sits.
    """

    amplitude: float = 0.0
    timing: float = 0.0
    width: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "timing", "width", "xi"):
            v = getattr(self, name)
            if not (0.0 <= v <= MAX_JITTER):
                raise ConfigurationError(f"jitter {name}={v} outside [0, {MAX_JITTER}]")

    @property
    def enabled(self) -> bool:
        return any((self.amplitude, self.timing, self.width, self.xi))

    @classmethod
    def parse(cls, text: str) -> JitterSpec:
        """'0.1' (all four) or 'amplitude=0.1,timing=0.1,width=0.05,xi=0.1'."""
        text = text.strip()
        if not text:
            return cls()
        if "=" not in text:
            v = float(text)
            return cls(v, v, v, v)
        kw = {}
        for part in text.split(","):
            key, _, val = part.partition("=")
            key = key.strip().lower()
            if key not in ("amplitude", "timing", "width", "xi"):
                raise ConfigurationError(f"unknown jitter key {key!r}")
            kw[key] = float(val)
        return cls(**kw)

    def format(self) -> str:
        return f"amplitude={self.amplitude:g},timing={self.timing:g},width={self.width:g},xi={self.xi:g}"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "gate-full"
    alpha: float = DEFAULT_ALPHA
    width: float = DEFAULT_WIDTH
    centers: tuple[float, ...] | None = None
    spacing: float | None = None
    first_center: float = DEFAULT_FIRST_CENTER
    xi: float = 16.0
    xi_list: tuple[float, ...] = DEFAULT_XI_LIST
    step: float | None = None
    record_stride: int = 1
    seed: int | None = None
    runs: int = 100
    jitter: JitterSpec = field(default_factory=JitterSpec)
    initial: str = "plus"
    spin_j: float = 1.0
    omega: float = 1.0
    segment_duration: float = 100.0
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        for name in ("width", "xi", "omega", "segment_duration"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be positive, got {v}")
        if self.spacing is not None and not self.spacing > 0:
            raise ConfigurationError(f"spacing must be positive, got {self.spacing}")
        if self.step is not None and not self.step > 0:
            raise ConfigurationError(f"step must be positive, got {self.step}")
        if any(not x > 0 for x in self.xi_list):
            raise ConfigurationError("xi values must be positive")
        if self.runs < 1 or self.workers < 1:
            raise ConfigurationError("runs and workers must be >= 1")
        if self.experiment == "robustness" and self.jitter.enabled and self.seed is None:
            raise ConfigurationError("robustness runs with jitter need a seed")
        if self.seed is not None and not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.initial not in TRIPOD_INITIAL_STATES:
            raise ConfigurationError(f"initial must be one of {TRIPOD_INITIAL_STATES}")

    @property
    def propagation_step(self) -> float:
        return self.step if self.step is not None else default_step(self.width)

    def propagation(self, sequence: PulseSequence | None = None, max_rate: float | None = None) -> PropagationConfig:
        cfg = PropagationConfig(step=self.propagation_step, record_stride=self.record_stride)
        if sequence is not None and sequence.pulses:
            cfg.check_resolves(sequence.min_width, max_rate)
        return cfg

    def half_sequence(self) -> PulseSequence:
        return half_cycle(self.alpha, self.width, self.centers or DEFAULT_HALF_CYCLE_CENTERS)

    def full_sequence(self) -> PulseSequence:
        if self.centers is not None:
            return cycle_sequence(FULL_CYCLE_AXES, self.alpha, self.width, self.centers)
        return full_cycle(self.alpha, self.width, self.spacing, self.first_center)

    @property
    def nominal_spacing(self) -> float:
        if self.centers is not None and len(self.centers) > 1:
            return float(np.min(np.diff(self.centers)))
        return self.spacing if self.spacing is not None else default_spacing(self.width)


# -- Hamiltonian sources -----------------------------------------------------


def tripod_source(sequence: PulseSequence):
    def source(times):
        return tripod_hamiltonian_batch(sequence.omega_array(np.atleast_1d(times)))

    return source


def gate_source(sequence: PulseSequence, model: TwoParticleModel):
    def source(times):
        return two_particle_hamiltonian_batch(model, sequence.omega_array(np.atleast_1d(times)))

    return source


# -- checkpoints ----------------------------------------------------------------


@dataclass(frozen=True)
class Checkpoint:
    label: str
    time: float
    signed_overlap: float


def transfer_checkpoints(traj: Trajectory, sequence: PulseSequence, targets) -> list[Checkpoint]:
    """Signed overlaps Re<target|psi> after each of the three adiabatic transfers.

    For the seven-pulse chain the transfers complete once the second pulse of
    each pair dominates: between pulses 1 and 2, between pulses 3 and 4, and
    at the end of the window.
    """
    c = sequence.centers
    times = (0.5 * (c[1] + c[2]), 0.5 * (c[3] + c[4]), sequence.t_end)
    tol = 0.05 * min(np.diff(c))
    out = []
    for (label, vec), t in zip(targets, times):
        k = int(np.argmin(np.abs(traj.times - t)))
        if abs(traj.times[k] - t) > tol:
            # coarsely recorded run; the state at t is not available
            continue
        out.append(Checkpoint(label, float(t), float(np.real(np.vdot(vec, traj.states[k])))))
    return out


# -- spin demo ------------------------------------------------------------------


@dataclass(frozen=True)
class SpinRow:
    m: float
    dynamical: float
    geometric: float
    expected_geometric: float
    cyclicity_defect: float


@dataclass(frozen=True)
class SpinDemoReport:
    J: float
    omega: float
    segment_duration: float
    rows: tuple[SpinRow, ...]

    def row(self, m: float) -> SpinRow:
        for r in self.rows:
            if abs(r.m - m) < 1e-9:
                return r
        raise KeyError(m)

    def summary(self) -> dict:
        out = {"J": self.J, "OMEGA": self.omega, "SEGMENT_DURATION": self.segment_duration}
        for r in self.rows:
            tag = f"M{r.m:+g}"
            out[f"GAMMA_D_{tag}"] = r.dynamical
            out[f"GAMMA_G_{tag}"] = r.geometric
            out[f"GAMMA_G_EXPECTED_{tag}"] = r.expected_geometric
        return out

    def table(self) -> tuple[list[str], list[list[float]]]:
        header = ["m", "gamma_d", "gamma_g", "expected_gamma_g", "cyclicity_defect"]
        rows = [[r.m, r.dynamical, r.geometric, r.expected_geometric, r.cyclicity_defect] for r in self.rows]
        return header, rows


def spin_step(cfg: ExperimentConfig) -> float:
    return cfg.step if cfg.step is not None else 0.05 / cfg.omega


def run_spin_demo(cfg: ExperimentConfig) -> SpinDemoReport:
    """Spin-J in a field carried around the z -> x -> y -> z octant, one row per m."""
    rep = spin_representation(cfg.spin_j)
    path = fig1_path(cfg.omega, cfg.segment_duration)
    pcfg = PropagationConfig(step=spin_step(cfg), record_stride=max(cfg.record_stride, 1))
    rows = []
    for m in rep.m_values:
        dec = spin_berry_phase(rep.J, m, path, pcfg)
        rows.append(SpinRow(float(m), dec.dynamical, dec.geometric, float(np.pi / 2 * m), dec.cyclicity_defect))
    return SpinDemoReport(rep.J, cfg.omega, cfg.segment_duration, tuple(rows))


# -- tripod loops -----------------------------------------------------------------


@dataclass(frozen=True)
class TripodReport:
    initial: str
    double: bool
    decomposition: PhaseDecomposition
    dark_residence: float
    holonomy_eigenphases: np.ndarray
    final_state: np.ndarray
    trajectory: Trajectory
    checkpoints: tuple[Checkpoint, ...] = ()

    def summary(self) -> dict:
        d = self.decomposition
        out = {
            "INITIAL": self.initial,
            "DOUBLE": int(self.double),
            "GAMMA_TOTAL": d.total,
            "GAMMA_D": d.dynamical,
            "GAMMA_G": d.geometric,
            "CYCLICITY_DEFECT": d.cyclicity_defect,
            "CYCLIC": int(d.cyclic),
            "DARK_RESIDENCE_MAX_ABS_ENERGY": self.dark_residence,
        }
        for k, ph in enumerate(self.holonomy_eigenphases):
            out[f"HOLONOMY_EIGENPHASE_{k}"] = float(ph)
        for cp in self.checkpoints:
            out[f"CHECKPOINT_{cp.label}"] = cp.signed_overlap
        return out


def run_tripod_cycle(cfg: ExperimentConfig, initial: str | None = None, double: bool | None = None) -> TripodReport:
    """Run one (or two) z -> x -> y -> z loops on the four-level tripod."""
    initial = initial or cfg.initial
    if double is None:
        double = cfg.experiment == "tripod-double"
    seq = cfg.full_sequence() if double else cfg.half_sequence()
    pcfg = cfg.propagation(seq)
    psi0 = tripod_initial_state(initial)
    source = tripod_source(seq)
    traj = propagate(source, psi0, seq.window, pcfg)
    dec = phase_decomposition(traj, psi0)
    if not dec.cyclic:
        warnings.warn(f"evolution from |{initial}> is not cyclic (defect {dec.cyclicity_defect:.3g})", stacklevel=2)
    hol = wilczek_zee_holonomy(source, 0.0, seq.window, PropagationConfig(step=pcfg.step))
    checkpoints = ()
    if double and initial == "2":
        targets = (("-4", -tripod_state(4)), ("+3", tripod_state(3)), ("-2", -tripod_state(2)))
        checkpoints = tuple(transfer_checkpoints(traj, seq, targets))
    return TripodReport(
        initial,
        double,
        dec,
        float(np.max(np.abs(traj.energy_expectations))),
        hol.eigenphases,
        traj.final_state,
        traj,
        checkpoints,
    )


# -- two-particle gate ----------------------------------------------------------------


@dataclass(frozen=True)
class GateHalfResult:
    xi: float
    trajectory: Trajectory
    population_da: float
    phase_da: float

    def summary(self) -> dict:
        return {"XI": self.xi, "POPULATION_DA": self.population_da, "PHASE_DA": self.phase_da}


GATE_CSV_COLUMNS = (("abs_ba", "ba"), ("abs_ab", "ab"), ("abs_da", "da"))


def run_gate_half(cfg: ExperimentConfig, xi: float | None = None) -> GateHalfResult:
    """|ba> through the half cycle; ideally ends in +|da> with zero phase.

    The reported phase follows the exp(-i gamma) convention and is unwrapped
    against the phase accumulated along the run, so ac-Stark phases larger
    than pi are reported in full.
    """
    xi = cfg.xi if xi is None else xi
    model = TwoParticleModel(xi)
    seq = cfg.half_sequence()
    pcfg = cfg.propagation(seq)
    traj = propagate(gate_source(seq, model), model.state("ba"), seq.window, pcfg)
    amp = traj.final_state[model.index("da")]
    phase = unwrap_against(-np.angle(amp), float(traj.accumulated_phase[-1]))
    return GateHalfResult(float(xi), traj, float(abs(amp) ** 2), float(phase))


@dataclass(frozen=True)
class XiScanReport:
    points: tuple[tuple[float, float], ...]
    populations: tuple[float, ...]
    c: float
    r_squared: float

    def summary(self) -> dict:
        out = {"FIT_C": self.c, "FIT_R2": self.r_squared}
        for (xi, ph), pop in zip(self.points, self.populations):
            out[f"PHASE_XI_{xi:g}"] = ph
            out[f"POPULATION_XI_{xi:g}"] = pop
        return out

    def table(self):
        header = ["xi", "abs_phase_da", "population_da", "fit"]
        rows = [[xi, ph, pop, self.c / xi] for (xi, ph), pop in zip(self.points, self.populations)]
        return header, rows


def _gate_half_point(args):
    cfg, xi = args
    res = run_gate_half(cfg, xi)
    return abs(res.phase_da), res.population_da


def run_xi_scan(cfg: ExperimentConfig) -> XiScanReport:
    """Final |da> phase over a grid of dipole shifts, fitted to c/xi."""
    xis = tuple(float(x) for x in cfg.xi_list)
    if len(xis) < 3:
        raise ConfigurationError("xi scan needs at least 3 values")
    cfg = replace(cfg, record_stride=max(cfg.record_stride, 1_000_000))
    results = _map(cfg.workers, _gate_half_point, [(cfg, xi) for xi in xis])
    points = tuple((xi, ph) for xi, (ph, _) in zip(xis, results))
    fit = fit_inverse_xi(points)
    return XiScanReport(points, tuple(pop for _, pop in results), fit.c, fit.r_squared)


@dataclass(frozen=True)
class GateReport:
    logical_unitary: np.ndarray
    conditional_phase: float
    fidelity: float
    leakage: float
    checkpoints: tuple[Checkpoint, ...] = ()

    @property
    def degraded(self) -> bool:
        return self.leakage > LEAKAGE_WARN

    def summary(self) -> dict:
        out = {
            "CONDITIONAL_PHASE": self.conditional_phase,
            "FIDELITY": self.fidelity,
            "LEAKAGE": self.leakage,
            "DEGRADED": int(self.degraded),
        }
        for cp in self.checkpoints:
            out[f"CHECKPOINT_{cp.label}"] = cp.signed_overlap
        return out


def cz_fidelity(u: np.ndarray) -> float:
    """|tr(CZ^dag U)/4|^2; insensitive to a global phase."""
    return float(min(abs(np.trace(CZ.conj().T @ u) / 4) ** 2, 1.0))


def gate_report(amp_11: complex, leakage: float, checkpoints=()) -> GateReport:
    """Assemble the logical unitary; 00, 01 and 10 are spectators with unit amplitude."""
    basis = logical_basis()
    u = np.eye(4, dtype=complex)
    order = list(basis)
    u[order.index("11"), order.index("11")] = amp_11
    cond = np.angle(u[3, 3] * u[0, 0] * np.conj(u[1, 1]) * np.conj(u[2, 2]))
    cond = float(np.mod(cond, 2 * np.pi))
    return GateReport(u, cond, cz_fidelity(u), float(leakage), tuple(checkpoints))


def run_gate_full(cfg: ExperimentConfig, sequence: PulseSequence | None = None, xi: float | None = None) -> GateReport:
    """|ba> through both loops; ideally returns as -|ba>, a controlled-Z."""
    xi = cfg.xi if xi is None else xi
    model = TwoParticleModel(xi)
    seq = sequence if sequence is not None else cfg.full_sequence()
    pcfg = cfg.propagation(seq)
    traj = propagate(gate_source(seq, model), model.state("ba"), seq.window, pcfg)
    amp = complex(traj.final_state[model.index("ba")])
    targets = (
        ("-ab", -model.state("ab")),
        ("+da", model.state("da")),
        ("-ba", -model.state("ba")),
    )
    report = gate_report(amp, 1.0 - abs(amp) ** 2, transfer_checkpoints(traj, seq, targets))
    if report.degraded:
        warnings.warn(f"gate leakage {report.leakage:.3g} exceeds {LEAKAGE_WARN}", stacklevel=2)
    return report


@dataclass(frozen=True)
class RobustnessSummary:
    runs: int
    jitter: JitterSpec
    seed: int | None
    phase_mean: float
    phase_std: float
    fidelity_mean: float
    fidelity_min: float
    phases: tuple[float, ...]
    fidelities: tuple[float, ...]

    def summary(self) -> dict:
        return {
            "RUNS": self.runs,
            "SEED": "" if self.seed is None else self.seed,
            "JITTER": self.jitter.format(),
            "PHASE_MEAN": self.phase_mean,
            "PHASE_STD": self.phase_std,
            "FIDELITY_MEAN": self.fidelity_mean,
            "FIDELITY_MIN": self.fidelity_min,
        }

    def table(self):
        header = ["run", "conditional_phase", "fidelity"]
        return header, [[k, p, f] for k, (p, f) in enumerate(zip(self.phases, self.fidelities))]


def jittered_sequence(base: PulseSequence, draws: np.ndarray, jitter: JitterSpec, spacing: float) -> PulseSequence:
    """Apply one row of uniform(-1, 1) draws per pulse: (amplitude, timing, width)."""
    pulses = []
    for p, (ua, ut, uw) in zip(base.pulses, draws):
        pulses.append(
            GaussianPulse(
                p.axis,
                p.alpha * (1 + ua * jitter.amplitude),
                p.center + ut * jitter.timing * spacing,
                p.width * (1 + uw * jitter.width),
            )
        )
    return PulseSequence.from_pulses(pulses)


def _robustness_run(args):
    cfg, seq, xi = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = run_gate_full(cfg, seq, xi)
    return rep.conditional_phase, rep.fidelity


def _map(workers: int, fn, items):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() returns in submission order, independent of completion order
        return list(pool.map(fn, items))


def run_robustness(cfg: ExperimentConfig) -> RobustnessSummary:
    """Monte-Carlo over jittered pulse parameters and dipole shift.

    All random numbers are drawn up front from one seeded generator, so the
    summary depends only on (config, seed) and not on worker scheduling.
    """
    base = cfg.full_sequence()
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    n_p = len(base.pulses)
    draws = rng.uniform(-1.0, 1.0, size=(cfg.runs, n_p, 3))
    xi_draws = rng.uniform(-1.0, 1.0, size=cfg.runs)
    spacing = cfg.nominal_spacing
    jobs = []
    for k in range(cfg.runs):
        seq = jittered_sequence(base, draws[k], cfg.jitter, spacing)
        xi = cfg.xi * (1 + xi_draws[k] * cfg.jitter.xi)
        jobs.append((replace(cfg, record_stride=max(cfg.record_stride, 1_000_000)), seq, xi))
    results = _map(cfg.workers, _robustness_run, jobs)
    phases = tuple(float(p) for p, _ in results)
    fids = tuple(float(f) for _, f in results)
    return RobustnessSummary(
        runs=cfg.runs,
        jitter=cfg.jitter,
        seed=cfg.seed,
        phase_mean=statistics.fmean(phases),
        phase_std=statistics.pstdev(phases),
        fidelity_mean=statistics.fmean(fids),
        fidelity_min=min(fids),
        phases=phases,
        fidelities=fids,
    )
