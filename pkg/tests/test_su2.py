import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from atomrb.clifford import gate_unitary
from atomrb.su2 import (
    I2,
    KET0,
    SX,
    SY,
    SZ,
    apply,
    average_gate_fidelity,
    equal_up_to_global_phase,
    is_unitary,
    population0,
    rotation,
    rotation_z,
)

angles = st.floats(-4 * np.pi, 4 * np.pi, allow_nan=False)


def test_zero_area_is_identity():
    assert np.allclose(rotation(0, 0), I2, atol=1e-15)


def test_pi_about_x_matches_gate_8_exactly():
    assert np.allclose(rotation(0, np.pi), -1j * np.array([[0, 1], [1, 0]]), atol=1e-15)


def test_quarter_turn_about_y_matches_gate_4():
    target = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    assert equal_up_to_global_phase(rotation(np.pi / 2, np.pi / 2), target)


def test_rotation_agrees_with_matrix_exponential():
    rng = np.random.default_rng(0)
    for phi, theta in rng.uniform(-7, 7, size=(20, 2)):
        h = np.cos(phi) * SX + np.sin(phi) * SY
        assert np.allclose(rotation(phi, theta), expm(-0.5j * theta * h), atol=1e-12)


@pytest.mark.parametrize(
    "theta, expected",
    [
        (0.0, I2),
        (np.pi / 2, np.exp(-1j * np.pi / 4) * np.diag([1, 1j])),
        (np.pi, -1j * np.diag([1, -1])),
    ],
)
def test_rotation_z_examples(theta, expected):
    assert np.allclose(rotation_z(theta), expected, atol=1e-15)


def test_apply_examples():
    assert np.allclose(apply(I2, KET0), KET0)
    assert population0(apply(rotation(0, np.pi), KET0)) == pytest.approx(0, abs=1e-15)
    assert population0(apply(rotation(0, np.pi / 2), KET0)) == pytest.approx(0.5, abs=1e-15)


def test_global_phase_examples():
    u = rotation(0.3, 1.1)
    assert equal_up_to_global_phase(u, np.exp(1j * np.pi / 4) * u, 1e-9)
    assert not equal_up_to_global_phase(I2, SX, 1e-9)
    with pytest.raises(ValueError):
        equal_up_to_global_phase(I2, I2, 0.0)


def test_composite_gate_12_is_gate_8_after_gate_4():
    r8 = -1j * np.array([[0, 1], [1, 0]])
    r4 = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    assert equal_up_to_global_phase(r8 @ r4, gate_unitary(12))


@given(angles, angles)
def test_inverse_rotation(phi, theta):
    assert np.allclose(rotation(phi, theta) @ rotation(phi, -theta), I2, atol=1e-10)


@given(angles, angles, angles)
def test_same_axis_additivity(phi, a, b):
    assert np.allclose(rotation(phi, a) @ rotation(phi, b), rotation(phi, a + b), atol=1e-10)


@given(angles)
def test_z_rotation_from_two_pi_pulses(theta):
    # two pi pulses whose axes differ by theta/2 make a z rotation by theta
    composed = rotation(np.pi / 2, np.pi) @ rotation(np.pi / 2 - theta / 2, np.pi)
    assert equal_up_to_global_phase(rotation_z(theta), composed, 1e-9)


def test_apply_preserves_norm_over_many_applications():
    rng = np.random.default_rng(1)
    pool = [rotation(p, t) for p, t in rng.uniform(-np.pi, np.pi, size=(1000, 2))]
    picks = rng.integers(0, len(pool), size=1_000_000)
    state = KET0.astype(complex)
    worst = 0.0
    for k in picks:
        state = apply(pool[k], state)
        worst = max(worst, abs(np.vdot(state, state).real - 1))
    assert worst < 1e-12


@given(angles, angles)
@settings(max_examples=50)
def test_rotations_are_unitary_with_unit_fidelity(phi, theta):
    u = rotation(phi, theta)
    assert is_unitary(u)
    assert average_gate_fidelity(u, u) == pytest.approx(1.0, abs=1e-12)


def test_pauli_z_is_rotation_z_pi_up_to_phase():
    assert equal_up_to_global_phase(rotation_z(np.pi), SZ)
