import math

import numpy as np
import pytest
from scipy import integrate
from shapely.geometry import box

from smawalls.common.exceptions import InvalidArgumentException
from smawalls.model.fields import (
    RadialProfile,
    RectangleConfig,
    Representation,
    make_zigzag,
    parabola_profile,
)
from smawalls.model.functionals import *
from smawalls.model.jump_energy import INFINITE, DensityKind
from smawalls.model.qtensor import q_from_angle
from smawalls.solve.optimizer import Difference, grad_check
from test.utilities import *

POINTWISE = BoundaryTermForm(BoundaryForm.POINTWISE)
INTEGRAL = BoundaryTermForm(BoundaryForm.INTEGRAL)


def _oracle_constant_interior(alpha: float, c: float, mu: float = 1.0) -> float:
    integrand = lambda t: math.cos(t) ** alpha * math.sqrt(1 + math.cos(t))
    value, _ = integrate.quad(integrand, 0.0, np.pi / 2, limit=200)
    return mu * math.exp(-c) * value


def _u_profile(fn, m):
    return RadialProfile.from_function(fn, 0.0, np.pi / 2, m, Representation.U)


def test_params_validation():
    for kwargs in ({"K1": 0.0}, {"mu": -1.0}, {"alpha": 1.0}, {"alpha": 0.0}, {"epsilon": -1e-3}):
        with pytest.raises(InvalidArgumentException):
            ModelParams(**kwargs)
    params = ModelParams(alpha=0.99)
    assert params.from_self(mu=2.0).mu == 2.0
    assert params.from_self(mu=2.0).alpha == 0.99


def test_mismatch_values():
    assert mismatch(0.0, 1.0) == 0.0
    assert_equal(mismatch(np.pi / 2, 0.3), 0.6, 1e-15)
    assert_equal(mismatch(np.pi / 4, 0.0), -math.sqrt(2) / 2, 1e-15)


def test_weight_functions():
    theta = np.array([0.0, np.pi / 2])
    for g in WeightFunction:
        assert_equal(g.value(theta), np.array([1.0, 0.0]), 1e-15)
    assert_equal(WeightFunction.COSINE.derivative(np.array([np.pi / 2])), -1.0, 1e-15)


def test_quarter_profile_span():
    p = RadialProfile.from_function(np.zeros_like, 0.0, np.pi, 11, Representation.U)
    with pytest.raises(InvalidArgumentException):
        quarter_elastic(p, ModelParams())


def test_elastic_of_zero_and_convergence():
    params = ModelParams()
    assert quarter_elastic(constant_u_profile(0.0), params) == 0.0
    values = [quarter_elastic(_u_profile(np.square, m), params) for m in (51, 101, 201)]
    assert_second_order(values)
    assert_equal(values[-1], (np.pi / 2) ** 3 / 3, 1e-4)


def test_elastic_scales_with_K1():
    u = constant_u_profile(0.3)
    a = quarter_elastic(u, ModelParams(K1=1.0))
    b = quarter_elastic(u, ModelParams(K1=3.0))
    assert_equal(b, 3 * a, 1e-14)


def test_interior_of_constant_profile():
    params = ModelParams(epsilon=0.0)
    value = quarter_jump_interior(constant_u_profile(0.4, 401), params)
    assert_equal(value, _oracle_constant_interior(0.5, 0.4), 2e-3)


def test_interior_convergence_order():
    params = ModelParams(epsilon=0.0)
    values = [quarter_jump_interior(constant_u_profile(0.0, m), params) for m in (51, 101, 201)]
    # endpoint singularity of cos^alpha limits the order
    assert_second_order(values, 2.5, 4.5)


def test_interior_epsilon_consistency():
    u = constant_u_profile(math.log(2.0))
    exact = quarter_jump_interior(u, ModelParams(epsilon=0.0))
    smoothed = quarter_jump_interior(u, ModelParams(epsilon=1e-12))
    assert abs(exact - smoothed) <= 1e-6 * exact


def test_interior_matches_geometric_route(rng):
    params = ModelParams(epsilon=0.0)
    for _ in range(5):
        u = smooth_u_profile(rng, 101)
        a = quarter_jump_interior(u, params)
        b = quarter_jump_interior_geometric(u, params)
        assert abs(a - b) <= 1e-9 * a


def test_boundary_forms_agree_in_the_limit():
    params = ModelParams(mu=1.5)
    u = constant_u_profile(0.2)
    assert_equal(quarter_jump_boundary(u, params, POINTWISE), math.sqrt(2) * 1.5 * math.exp(-0.2), 1e-14)
    assert_equal(quarter_jump_boundary(u, params, INTEGRAL), math.sqrt(2) * 1.5 * math.exp(-0.2), 1e-12)

    # integration by parts: both forms equal sqrt(2) mu e^(-u(0))
    values = [quarter_jump_boundary(_u_profile(lambda t: t, m), params, INTEGRAL) for m in (51, 101, 201)]
    assert_second_order(values)
    assert_equal(values[-1], math.sqrt(2) * 1.5, 1e-4)

    cosine = BoundaryTermForm(BoundaryForm.INTEGRAL, WeightFunction.COSINE)
    assert_equal(quarter_jump_boundary(_u_profile(lambda t: t, 201), params, cosine), math.sqrt(2) * 1.5, 1e-4)


def test_breakdown_example():
    params = ModelParams(K1=2.0, mu=1.0, alpha=0.5)
    breakdown = quarter_total(constant_u_profile(0.0, 401), params, POINTWISE)
    assert breakdown.elastic == 0.0
    assert_equal(breakdown.jump_boundary, math.sqrt(2), 1e-14)
    assert_equal(breakdown.jump_interior, _oracle_constant_interior(0.5, 0.0), 2e-3)
    assert breakdown.total == breakdown.elastic + breakdown.jump_interior + breakdown.jump_boundary
    assert set(breakdown.to_dict()) == {"elastic", "jump_interior", "jump_boundary", "total"}


def test_jump_terms_scale_with_mu(rng):
    u = smooth_u_profile(rng)
    a = quarter_total(u, ModelParams(mu=1.0), INTEGRAL)
    b = quarter_total(u, ModelParams(mu=2.5), INTEGRAL)
    assert_equal(b.jump_interior, 2.5 * a.jump_interior, 1e-12)
    assert_equal(b.jump_boundary, 2.5 * a.jump_boundary, 1e-12)
    assert b.elastic == a.elastic


def test_objective_value_matches_breakdown(rng):
    u = smooth_u_profile(rng)
    for form in (POINTWISE, INTEGRAL):
        objective = QuarterObjective(u.m, ModelParams(), form)
        value, grad = objective(u.values)
        assert_equal(value, quarter_total(u, ModelParams(), form).total, 1e-12)
        assert grad.shape == (u.m,)


def test_quarter_gradient_at_constant_guess():
    for form in (POINTWISE, INTEGRAL):
        objective = QuarterObjective(50, ModelParams(epsilon=1e-12), form)
        assert grad_check(objective, np.full(50, math.log(2.0))) <= 1e-5


def test_quarter_gradient_on_smooth_profiles(rng):
    forms = (POINTWISE, INTEGRAL, BoundaryTermForm(BoundaryForm.INTEGRAL, WeightFunction.COSINE))
    for form in forms:
        u = smooth_u_profile(rng)
        objective = QuarterObjective(u.m, ModelParams(alpha=0.3, epsilon=1e-12), form)
        assert grad_check(objective, u.values) <= 1e-5


def test_quarter_gradient_on_twenty_random_profiles(rng):
    objective = QuarterObjective(50, ModelParams(epsilon=1e-12), INTEGRAL)
    for _ in range(20):
        u = smooth_u_profile(rng, 50)
        assert grad_check(objective, u.values) <= 1e-5


def test_complex_step_gradient_check(rng):
    u = smooth_u_profile(rng)
    for form in (POINTWISE, INTEGRAL):
        objective = QuarterObjective(u.m, ModelParams(epsilon=1e-12), form)
        assert grad_check(objective, u.values, method=Difference.COMPLEX) <= 1e-10
    for rep in Representation:
        objective = RectangleObjective(41, ModelParams(epsilon=1e-2), rep)
        rho = 1 / (1 + np.sin(objective.theta[1:-1])) + 0.05 * np.sin(3 * objective.theta[1:-1])
        x = rho if rep is Representation.RHO else -np.log(rho)
        assert grad_check(objective, x, method=Difference.COMPLEX) <= 1e-10


def test_correction_objective(rng):
    u = smooth_u_profile(rng)
    objective = QuarterObjective(u.m, ModelParams(), INTEGRAL)
    shifted = objective.around(u.values)
    assert shifted.hessian_bandwidth == 1
    assert shifted(np.zeros(u.m))[0] == objective(u.values)[0]

    x = 1e-3 * np.sin(np.arange(u.m))
    value, grad = shifted(x)
    direct_value, direct_grad = objective(shifted.point(x))
    assert_equal(value, direct_value, 1e-12)
    assert_equal(grad, direct_grad, 1e-9)

    rectangle = RectangleObjective(41, ModelParams(epsilon=1e-2), Representation.U)
    base = -np.log(1 / (1 + np.sin(rectangle.theta[1:-1])))
    dx = 1e-3 * np.cos(np.arange(39))
    assert_equal(rectangle.around(base)(dx)[1], rectangle(base + dx)[1], 1e-9)


def test_cell_slopes_see_the_alternating_mode():
    objective = QuarterObjective(50, ModelParams(), INTEGRAL)
    alternating = 0.01 * (-1.0) ** np.arange(50)
    assert np.all(objective.A @ alternating == 0.0)
    assert_equal(np.abs(objective.B @ alternating), 0.02 / objective.h, 1e-12)


def test_elastic_gradient_is_exact():
    w = QuarterObjective(50, ModelParams(), INTEGRAL).w
    elastic = lambda u: (0.5 * 2.0 * (w @ u), 0.5 * 2.0 * w)
    assert grad_check(elastic, np.zeros(50)) <= 1e-10


def test_rectangle_gradient():
    params = ModelParams(epsilon=1e-2)
    for rep in Representation:
        objective = RectangleObjective(41, params, rep)
        rho = 1 / (1 + np.sin(objective.theta[1:-1])) + 0.05 * np.sin(3 * objective.theta[1:-1])
        x = rho if rep is Representation.RHO else -np.log(rho)
        assert grad_check(objective, x) <= 1e-5


def test_rectangle_energy_of_parabola():
    params = ModelParams()
    value = rectangle_jump_energy(RectangleConfig(1.0, 1.0, parabola_profile(1.0, 801)), params)
    assert abs(value - parabola_baseline(1.0, params)) <= 2e-3 * value
    assert parabola_baseline(1.0, params) < half_circle_baseline(1.0, params)


def test_rectangle_energy_of_half_circle():
    params = ModelParams()
    circle = RadialProfile.from_function(np.ones_like, 0.0, np.pi, 801)
    value = rectangle_jump_energy(RectangleConfig(1.0, 1.0, circle), params)
    assert abs(value - half_circle_baseline(1.0, params)) <= 2e-3 * value


def test_rectangle_energy_scales_with_L():
    params = ModelParams()
    base = rectangle_jump_energy(RectangleConfig(1.0, 1.0, parabola_profile(1.0, 101)), params)
    scaled = rectangle_jump_energy(RectangleConfig(3.0, 3.0, parabola_profile(3.0, 101)), params)
    assert_equal(scaled, 3 * base, 1e-12)


def test_objective_matches_rectangle_energy():
    params = ModelParams(epsilon=0.0)
    profile = parabola_profile(1.0, 101)
    objective = RectangleObjective(101, params, Representation.RHO)
    value, _ = objective(profile.rho[1:-1])
    assert_equal(value, rectangle_jump_energy(RectangleConfig(1.0, 1.0, profile), params), 1e-12)


def test_parabola_beats_perturbations(rng):
    params = ModelParams()
    profile = parabola_profile(1.0, 201)
    best = rectangle_jump_energy(RectangleConfig(1.0, 1.0, profile), params)
    for _ in range(200):
        a = rng.uniform(0.02, 0.1) * rng.choice([-1, 1])
        k = int(rng.integers(1, 8))
        rho = profile.rho + a * np.sin(k * profile.theta)
        rho[0] = rho[-1] = 1.0
        perturbed = RectangleConfig(1.0, 1.0, RadialProfile(profile.theta, rho))
        assert rectangle_jump_energy(perturbed, params) >= best - 1e-8


def test_zigzag_energies():
    params = ModelParams(mu=2.0, alpha=0.5)
    q_plus, q_minus = q_from_angle(np.pi / 2), q_from_angle(0.0)
    flat = make_zigzag(1.0, 0, q_plus, q_minus)
    assert partition_energy(flat, params, DensityKind.SINGULAR) == INFINITE
    assert_equal(partition_energy(flat, params, DensityKind.ENVELOPE), 2 * math.sqrt(2), 1e-12)
    for n in range(1, 65):
        config = make_zigzag(1.0, n, q_plus, q_minus)
        assert config.bisecting
        assert_equal(partition_energy(config, params, DensityKind.SINGULAR), 2 * math.sqrt(2), 1e-12)
        assert_equal(partition_energy(config, params, DensityKind.ENVELOPE), 2 * math.sqrt(2), 1e-12)


def test_partition_energy_window_and_rotation():
    params = ModelParams()
    q_plus, q_minus = q_from_angle(np.pi / 3), q_from_angle(0.0)
    flat = make_zigzag(1.0, 0, q_plus, q_minus)
    full = partition_energy(flat, params, DensityKind.ENVELOPE)
    half = partition_energy(flat, params, DensityKind.ENVELOPE, window=box(0.0, -1.0, 0.5, 1.0))
    assert_equal(half, full / 2, 1e-12)

    zigzag = make_zigzag(1.0, 5, q_plus, q_minus)
    value = partition_energy(zigzag, params, DensityKind.ENVELOPE)
    assert_equal(partition_energy(zigzag.rotated(0.7), params, DensityKind.ENVELOPE), value, 1e-12)
