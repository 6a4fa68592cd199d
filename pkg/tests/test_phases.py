import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geophase.errors import InvalidInputError
from geophase.experiments import tripod_source
from geophase.operators import spin_representation, tripod_generators, tripod_state
from geophase.phases import (
    fit_inverse_xi,
    phase_decomposition,
    rotation_composition_check,
    spin_berry_phase,
    unwrap_against,
    wilczek_zee_holonomy,
    wrap_phase,
)
from geophase.propagate import PropagationConfig, constant_hamiltonian, propagate
from geophase.pulses import fig1_path, half_cycle

DARK_BASIS = (tripod_state(2).astype(complex), tripod_state(3).astype(complex))


def tripod_holonomy(seq, step=0.5):
    return wilczek_zee_holonomy(tripod_source(seq), 0.0, seq.window, PropagationConfig(step))


def test_wrap_and_unwrap():
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert unwrap_against(0.1, 100.0) == pytest.approx(0.1 + 16 * 2 * np.pi)


def test_pure_dynamical_decomposition():
    h = np.diag([0.5, -0.5])
    psi0 = np.array([1.0, 0.0])
    traj = propagate(constant_hamiltonian(h), psi0, (0, np.pi), PropagationConfig(0.01))
    dec = phase_decomposition(traj, psi0)
    assert dec.total == pytest.approx(np.pi / 2, abs=1e-12)
    assert dec.dynamical == pytest.approx(np.pi / 2, abs=1e-12)
    assert dec.geometric == pytest.approx(0.0, abs=1e-12)
    assert dec.cyclic


def test_large_dynamical_phase_is_unwrapped():
    h = np.diag([1.0, 0.0])
    psi0 = np.array([1.0, 0.0])
    traj = propagate(constant_hamiltonian(h), psi0, (0, 300), PropagationConfig(0.05))
    dec = phase_decomposition(traj, psi0)
    assert dec.total == pytest.approx(300.0, abs=1e-9)
    assert dec.geometric == pytest.approx(0.0, abs=1e-9)


def test_noncyclic_is_flagged():
    h = np.array([[0.0, 1.0], [1.0, 0.0]])
    psi0 = np.array([1.0, 0.0])
    traj = propagate(constant_hamiltonian(h), psi0, (0, np.pi / 2), PropagationConfig(0.01))
    dec = phase_decomposition(traj, psi0)
    assert not dec.cyclic
    assert 0 <= dec.cyclicity_defect <= 1


def test_sign_consistency_reconstruction():
    seq = half_cycle()
    psi0 = (DARK_BASIS[1] + 1j * DARK_BASIS[0]) / np.sqrt(2)
    traj = propagate(tripod_source(seq), psi0, seq.window, PropagationConfig(0.5))
    dec = phase_decomposition(traj, psi0)
    proj = np.vdot(psi0, traj.final_state) * psi0
    rebuilt = np.exp(-1j * dec.total) * (1 - dec.cyclicity_defect) * psi0
    assert np.max(np.abs(proj - rebuilt)) <= 1e-9


@pytest.mark.parametrize("J", [0.5, 1, 1.5, 2])
def test_rotation_composition_identity(J):
    assert rotation_composition_check(spin_representation(J)) <= 1e-12


def test_rotation_composition_on_tripod_space():
    assert rotation_composition_check(tripod_generators()) <= 1e-12


def test_spin_m_zero_row():
    dec = spin_berry_phase(1, 0, fig1_path(1.0, 100.0), PropagationConfig(0.05))
    assert dec.dynamical == pytest.approx(0.0, abs=1e-12)
    assert dec.geometric == pytest.approx(0.0, abs=1e-9)


def test_spin_half_berry_phase():
    # segment duration 300 keeps the nonadiabatic correction m(pi/2)^2/(Omega D) below 0.02
    dec = spin_berry_phase(0.5, 0.5, fig1_path(1.0, 300.0), PropagationConfig(0.05))
    assert dec.geometric == pytest.approx(np.pi / 4, abs=0.02)
    assert dec.dynamical == pytest.approx(450.0, abs=0.5)


def test_spin_berry_phase_warns_when_not_adiabatic():
    with pytest.warns(UserWarning):
        spin_berry_phase(0.5, 0.5, fig1_path(1.0, 10.0), PropagationConfig(0.05))
    with pytest.raises(InvalidInputError):
        spin_berry_phase(0.5, 1.5, fig1_path(1.0, 100.0), PropagationConfig(0.05))


def test_constant_hamiltonian_holonomy_is_identity():
    h = np.diag([0.0, 0.0, 2.0])
    hol = wilczek_zee_holonomy(constant_hamiltonian(h), 0.0, (0, 10), PropagationConfig(0.5))
    assert np.allclose(hol.holonomy, np.eye(2), atol=1e-14)


def test_open_path_is_rejected():
    def source(times):
        times = np.atleast_1d(times)
        return np.array([np.diag([0.0, 1.0 + t]) for t in times])

    with pytest.raises(InvalidInputError):
        wilczek_zee_holonomy(source, 0.0, (0, 1), PropagationConfig(0.1))


def test_tripod_holonomy_eigenvectors():
    hol = tripod_holonomy(half_cycle())
    assert hol.eigenphases[0] == pytest.approx(-hol.eigenphases[1], abs=1e-12)
    plus = (DARK_BASIS[1] + 1j * DARK_BASIS[0]) / np.sqrt(2)
    minus = (DARK_BASIS[1] - 1j * DARK_BASIS[0]) / np.sqrt(2)
    m = hol.matrix_in([plus, minus])
    # eigenvectors are the +- superpositions: off-diagonal vanishes
    assert abs(m[0, 1]) <= 1e-10 and abs(m[1, 0]) <= 1e-10
    # + picks up exp(+i phi), i.e. geometric phase -phi with phi near pi/2
    assert np.angle(m[0, 0]) > 1.4 and np.angle(m[1, 1]) < -1.4


def test_holonomy_agrees_with_propagation():
    seq = half_cycle()
    hol = tripod_holonomy(seq)
    b = np.column_stack(DARK_BASIS)
    u = np.column_stack(
        [propagate(tripod_source(seq), v, seq.window, PropagationConfig(0.5)).final_state for v in DARK_BASIS]
    )
    assert np.max(np.abs(b.conj().T @ u - hol.matrix_in(DARK_BASIS))) <= 0.01


def test_holonomy_invariant_under_amplitude_scaling():
    base = tripod_holonomy(half_cycle())
    scaled = tripod_holonomy(half_cycle(alpha=1.3))
    assert np.max(np.abs(base.eigenphases - scaled.eigenphases)) <= 1e-2


def test_holonomy_invariant_under_time_dilation():
    base = tripod_holonomy(half_cycle())
    stretched = tripod_holonomy(half_cycle(1.0, 30.0, (75, 150, 210, 285)), step=0.75)
    assert np.max(np.abs(base.eigenphases - stretched.eigenphases)) <= 1e-2


@pytest.mark.xfail(strict=True, reason="wider pulses at fixed centres overlap non-neighbours; loop shrinks")
def test_holonomy_invariant_under_width_scaling_at_fixed_centers():
    base = tripod_holonomy(half_cycle())
    wide = tripod_holonomy(half_cycle(1.0, 30.0))
    assert np.max(np.abs(base.eigenphases - wide.eigenphases)) <= 1e-2


@pytest.mark.xfail(strict=True, reason="10% centre shifts change the corner cutting by ~0.05 rad")
def test_holonomy_invariant_under_center_jitter():
    base = tripod_holonomy(half_cycle())
    shifted = tripod_holonomy(half_cycle(1.0, 20.0, (45, 105, 135, 195)))
    assert np.max(np.abs(base.eigenphases - shifted.eigenphases)) <= 1e-2


def test_fit_exact_points():
    fit = fit_inverse_xi([(x, 2 / x) for x in (1, 2, 4, 8)])
    assert fit.c == pytest.approx(2.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant_points_is_poor_but_valid():
    fit = fit_inverse_xi([(x, 1.0) for x in (1, 2, 4, 8)])
    assert fit.r_squared < 0.5


def test_fit_with_offset():
    fit = fit_inverse_xi([(x, 3 / x + 0.5) for x in (1, 2, 4, 8)], with_offset=True)
    assert fit.c == pytest.approx(3.0) and fit.offset == pytest.approx(0.5)


def test_fit_validation():
    with pytest.raises(InvalidInputError):
        fit_inverse_xi([(1, 1), (2, 0.5)])
    with pytest.raises(InvalidInputError):
        fit_inverse_xi([(1, 1), (2, 0.5), (0, 1)])


@settings(max_examples=50, deadline=None)
@given(c=st.floats(-100, 100), xis=st.lists(st.floats(0.5, 100), min_size=3, max_size=8, unique=True))
def test_fit_recovers_coefficient(c, xis):
    fit = fit_inverse_xi([(x, c / x) for x in xis])
    assert fit.c == pytest.approx(c, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(p=st.floats(-1e3, 1e3), r=st.floats(-1e3, 1e3))
def test_unwrap_property(p, r):
    u = unwrap_against(p, r)
    assert abs(u - r) <= np.pi + 1e-9
    assert abs(wrap_phase(u - p)) <= 1e-9 or abs(abs(wrap_phase(u - p)) - 2 * np.pi) <= 1e-9
