import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geophase.errors import InvalidInputError, OutOfRangeError
from geophase.pulses import (
    FieldPath,
    GaussianPulse,
    PulseSequence,
    fig1_path,
    full_cycle,
    half_cycle,
)


def test_envelope_formula():
    p = GaussianPulse("x", 2.0, 10.0, 3.0)
    assert p.envelope(10.0) == 2.0
    assert np.isclose(p.envelope(13.0), 2.0 * np.exp(-0.5), rtol=1e-15)


@pytest.mark.parametrize(
    "kw",
    [dict(axis="w"), dict(alpha=-1.0), dict(width=0.0), dict(center=np.nan)],
)
def test_pulse_validation(kw):
    base = dict(axis="x", alpha=1.0, center=0.0, width=1.0)
    base.update(kw)
    with pytest.raises(InvalidInputError):
        GaussianPulse(**base)


def test_isolated_pulse_peak():
    seq = half_cycle()
    om = seq.omega_at(100.0)
    assert np.isclose(om[0], 1.0, atol=1e-15)
    # neighbours at 50 and 140 contribute exp(-25/8) and exp(-2)
    assert om[1] == pytest.approx(np.exp(-2.0))
    assert om[2] == pytest.approx(np.exp(-50**2 / 800) + np.exp(-90**2 / 800))


def test_midpoint_of_consecutive_pulses():
    seq = half_cycle()
    om = seq.omega_at(120.0)
    assert om[0] == pytest.approx(np.exp(-0.5), rel=1e-14)
    assert om[1] == pytest.approx(np.exp(-0.5), rel=1e-14)


def test_empty_sequence():
    assert np.array_equal(PulseSequence().omega_at(12.3), np.zeros(3))


def test_omega_at_outside_window():
    with pytest.raises(OutOfRangeError):
        half_cycle().omega_at(300.0)


def test_half_cycle_defaults():
    seq = half_cycle()
    assert seq.axes == ("z", "x", "y", "z")
    assert seq.centers == (50.0, 100.0, 140.0, 190.0)
    assert seq.window == (-50.0, 290.0)


def test_half_cycle_zero_alpha():
    seq = half_cycle(alpha=0.0)
    assert not np.any(seq.omega_array(np.linspace(*seq.window, 101)))


def test_half_cycle_rejects_unordered_centers():
    with pytest.raises(InvalidInputError):
        half_cycle(centers=(50, 100, 100, 190))
    with pytest.raises(InvalidInputError):
        half_cycle(centers=(50, 100, 190))


def test_full_cycle_examples():
    seq = full_cycle(1.0, 20.0, spacing=50.0)
    assert seq.centers == tuple(50.0 + 50 * k for k in range(7))
    assert seq.axes == ("z", "x", "y", "z", "x", "y", "z")
    prefix = half_cycle(1.0, 20.0, (50, 100, 150, 200))
    assert seq.pulses[:4] == prefix.pulses
    with pytest.raises(InvalidInputError):
        full_cycle(spacing=0.0)


def test_repeated_axis_pulses_add():
    seq = full_cycle(1.0, 20.0, spacing=50.0)
    t = 175.0
    expected = sum(p.envelope(t) for p in seq.pulses if p.axis == "z")
    assert seq.omega_at(t)[2] == pytest.approx(expected, rel=1e-15)


def test_window_must_cover_pulses():
    with pytest.raises(InvalidInputError):
        PulseSequence((GaussianPulse("x", 1, 0, 1),), -4.0, 5.0)


def test_sequence_roundtrip():
    seq = half_cycle(0.7, 15.0, (0, 40, 80, 120))
    assert PulseSequence.from_dict(seq.to_dict()) == seq


def test_field_nonnegative_and_smooth():
    seq = half_cycle()
    t = np.linspace(*seq.window, 20001)
    om = seq.omega_array(t)
    assert np.all(om >= 0)
    # a single Gaussian has |f'| <= alpha/T exp(-1/2); at most two pulses per axis
    slope = np.abs(np.diff(om, axis=0)) / np.diff(t)[:, None]
    assert np.max(slope) <= 2 * np.exp(-0.5) / 20 * 1.001


@pytest.mark.xfail(
    strict=True,
    reason="with default pulses the z(50)/y(140) product peaks at ~6e-3, above 1e-3",
)
def test_non_consecutive_overlap_bound():
    seq = half_cycle()
    t = np.linspace(*seq.window, 40001)
    env = np.array([p.envelope(t) for p in seq.pulses])
    worst = max(np.max(env[i] * env[j]) for i, j in itertools.combinations(range(4), 2) if j - i > 1)
    assert worst <= 1e-3


def test_fig1_path_directions():
    path = fig1_path(1.0, 100.0)
    assert np.allclose(path.direction_after(1), [1, 0, 0], atol=1e-15)
    assert np.allclose(path.direction_after(2), [0, 1, 0], atol=1e-15)
    assert np.max(np.abs(path.direction_after(3) - [0, 0, 1])) <= 1e-12
    assert path.duration == 300.0


def test_fig1_composed_rotation_is_quarter_turn_about_z():
    r = fig1_path(1.0, 1.0).composed_rotation()
    rz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    assert np.max(np.abs(r - rz)) <= 1e-12


def test_fig1_path_unit_norm_everywhere():
    path = fig1_path(2.0, 10.0)
    d = path.direction_array(np.linspace(0, 30, 3001))
    assert np.max(np.abs(np.linalg.norm(d, axis=1) - 1)) <= 1e-12
    assert np.allclose(np.linalg.norm(path.omega_array([5.0]), axis=1), 2.0)


def test_field_path_validation():
    with pytest.raises(InvalidInputError):
        FieldPath((((1, 1, 0), 1.0, 1.0),), 1.0)
    with pytest.raises(InvalidInputError):
        fig1_path(0.0, 1.0)
    with pytest.raises(OutOfRangeError):
        fig1_path(1.0, 1.0).omega_at(4.0)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0, 5),
    width=st.floats(0.5, 50),
    gaps=st.lists(st.floats(0.1, 100), min_size=3, max_size=3),
    frac=st.floats(0, 1),
)
def test_half_cycle_property(alpha, width, gaps, frac):
    centers = np.cumsum([0.0, *gaps])
    seq = half_cycle(alpha, width, centers)
    t0, t1 = seq.window
    assert t0 <= centers[0] - 5 * width + 1e-9 and t1 >= centers[-1] - 1e-9 + 5 * width
    om = seq.omega_at(t0 + frac * (t1 - t0))
    assert np.all(om >= 0)
    assert om[2] <= 2 * alpha + 1e-12 and om[0] <= alpha + 1e-12
