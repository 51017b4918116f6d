import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from smawalls.common.exceptions import DegenerateJump, InvalidArgumentException
from smawalls.model.jump_energy import *
from smawalls.model.qtensor import UnitVector, q_from_angle
from test.utilities import *

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
alphas = st.floats(min_value=0.05, max_value=0.95)


def test_alpha_must_be_in_open_interval():
    t = JumpTriple.from_angles(1.0, 0.0, 0.0)
    for alpha in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(InvalidArgumentException):
            phi(t, alpha)
        with pytest.raises(InvalidArgumentException):
            zeta(t, alpha)
    assert phi(t, 0.99) > 0


def test_zeta_on_and_off_bisector():
    # beta+ = 90, beta- = 0: bisectors at 45 + k 90 degrees
    on = JumpTriple.from_angles(np.pi / 2, 0.0, np.pi / 4)
    off = JumpTriple.from_angles(np.pi / 2, 0.0, np.pi / 2)
    assert_equal(zeta(on, 0.5), 1.0, 1e-12)
    assert zeta(off, 0.5) == INFINITE


def test_zeta_tolerance():
    t = JumpTriple.from_angles(np.pi / 2, 0.0, np.pi / 4 + 1e-6)
    assert zeta(t, 0.5) == INFINITE
    assert math.isfinite(zeta(t, 0.5, tol=1e-5))
    with pytest.raises(InvalidArgumentException):
        zeta(t, 0.5, tol=-1.0)


def test_equal_tensors_have_zero_density():
    t = JumpTriple.from_angles(0.7, 0.7, 0.3)
    assert phi(t, 0.5) == 0.0
    assert zeta(t, 0.5) == 0.0
    assert zeta(JumpTriple.from_angles(0.7, 0.7 + np.pi, 1.1), 0.5) == 0.0


def test_phi_vertical_normal_example():
    t = JumpTriple.from_angles(np.pi / 2, 0.0, np.pi / 2)
    assert_equal(phi(t, 0.5), math.sqrt(2), 1e-12)


@given(angles, angles, angles, alphas)
def test_phi_matches_angular_form(bp, bm, gamma, alpha):
    assume(abs(math.sin(bp - bm)) > 1e-3)
    t = JumpTriple.from_angles(bp, bm, gamma)
    assert abs(phi(t, alpha) - phi_angular(bp, bm, gamma, alpha)) <= 1e-12


@given(angles, angles, angles, alphas)
def test_phi_is_swap_symmetric(bp, bm, gamma, alpha):
    t = JumpTriple.from_angles(bp, bm, gamma)
    assert abs(phi(t, alpha) - phi(t.swapped(), alpha)) <= 1e-12


@given(angles, angles, angles, angles, alphas)
def test_phi_is_rotation_invariant(bp, bm, gamma, delta, alpha):
    assume(abs(math.sin(bp - bm)) > 1e-3)
    value = phi_angular(bp, bm, gamma, alpha)
    assert abs(phi_angular(bp + delta, bm + delta, gamma + delta, alpha) - value) <= 1e-12
    assert abs(phi_angular(-bp, -bm, -gamma, alpha) - value) <= 1e-12
    t = JumpTriple.from_angles(bp, bm, gamma)
    assert abs(phi(t.rotated(delta), alpha) - phi(t, alpha)) <= 1e-12


@given(angles, angles, angles, alphas)
def test_envelope_inequality(bp, bm, gamma, alpha):
    t = JumpTriple.from_angles(bp, bm, gamma)
    assert phi(t, alpha) <= zeta(t, alpha, tol=0.0) + 1e-12


@given(angles, angles, angles, alphas)
def test_anisotropy_factor_range(bp, bm, gamma, alpha):
    t = JumpTriple.from_angles(bp, bm, gamma)
    assume(t.distance > 1e-3)
    factor = phi(t, alpha) / t.distance ** alpha
    assert 1 - 1e-12 <= factor <= math.sqrt(2) + 1e-12


def test_bisectors_minimize_phi():
    q_plus, q_minus = q_from_angle(1.0), q_from_angle(0.2)
    gammas = np.linspace(0, 2 * np.pi, 10000, endpoint=False)
    cell = gammas[1] - gammas[0]
    values = np.array([phi(JumpTriple(q_plus, q_minus, UnitVector.from_angle(g)), 0.5) for g in gammas])

    normals = bisectors(q_plus, q_minus)
    assert len(normals) == 4
    at_bisector = [phi(JumpTriple(q_plus, q_minus, n), 0.5) for n in normals]
    assert max(at_bisector) <= values.min() + 1e-12
    g_min = gammas[np.argmin(values)]
    distances = [abs(math.remainder(g_min - n.gamma, 2 * np.pi)) for n in normals]
    assert min(distances) <= cell

    for n in normals:
        assert is_bisector(JumpTriple(q_plus, q_minus, n))


def test_bisectors_of_equal_tensors():
    q = q_from_angle(0.3)
    with pytest.raises(DegenerateJump):
        bisectors(q, q)


def test_density_dispatch():
    t = JumpTriple.from_angles(np.pi / 2, 0.0, np.pi / 2)
    assert density(t, 0.5, DensityKind.SINGULAR) == INFINITE
    assert_equal(density(t, 0.5, DensityKind.ENVELOPE), math.sqrt(2), 1e-12)


def test_phi_angular_vectorized():
    gamma = np.linspace(0, np.pi, 7)
    values = phi_angular(np.pi / 2, 0.0, gamma, 0.5)
    assert values.shape == (7,)
    assert np.all(values >= 1 - 1e-12)


def test_second_identity_sweep(rng):
    # sqrt(2) |Q+ nu.nu - Q- nu.nu| = |sin(beta+ + beta- - 2 gamma) sin(beta+ - beta-)|
    for bp, bm, gamma, _ in zip(*angle_sweep(rng)):
        t = JumpTriple.from_angles(bp, bm, gamma)
        target = abs(math.sin(bp + bm - 2 * gamma) * math.sin(bp - bm))
        assert abs(math.sqrt(2) * abs(t.normal_jump) - target) <= 1e-12


def test_swap_symmetry_sweep(rng):
    for bp, bm, gamma, alpha in zip(*angle_sweep(rng)):
        t = JumpTriple.from_angles(bp, bm, gamma)
        assert phi(t, alpha) == phi(t.swapped(), alpha)


def test_rotation_and_reflection_sweep(rng):
    bp, bm, gamma, alpha = angle_sweep(rng)
    delta = rng.uniform(-2 * np.pi, 2 * np.pi, bp.size)
    for k in range(bp.size):
        t = JumpTriple.from_angles(bp[k], bm[k], gamma[k])
        value = phi(t, alpha[k])
        assert abs(phi(t.rotated(delta[k]), alpha[k]) - value) <= 1e-12
        reflected = JumpTriple.from_angles(-bp[k], -bm[k], -gamma[k])
        assert abs(phi(reflected, alpha[k]) - value) <= 1e-12


def test_angular_form_and_bounds_sweep(rng):
    bp, bm, gamma, alpha = angle_sweep(rng)
    angular = np.array([phi_angular(*args) for args in zip(bp, bm, gamma, alpha)])
    for k in range(bp.size):
        t = JumpTriple.from_angles(bp[k], bm[k], gamma[k])
        value = phi(t, alpha[k])
        assert abs(value - angular[k]) <= 1e-12
        floor = t.distance ** alpha[k]
        assert value >= floor
        assert value <= math.sqrt(2) * floor * (1 + 1e-12)
        assert value <= zeta(t, alpha[k], tol=0.0) + 1e-12
