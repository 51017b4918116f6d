import numpy as np
import pytest

from smawalls.common.exceptions import MisconfigurationException
from smawalls.model.fields import RadialProfile
from smawalls.solve.optimizer import *
from test.utilities import *


# converged means |g|_inf <= grad_tol, so the stagnation stop is switched off
STRICT = SolverConfig(f_tol=0.0)


def _quadratic(A, b):
    return lambda x: (0.5 * x @ A @ x - b @ x, A @ x - b)


def _spd(rng, n, lo=1.0, hi=10.0):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(np.linspace(lo, hi, n)) @ Q.T


def _rosenbrock(x):
    a, b = x
    value = (1 - a) ** 2 + 100 * (b - a ** 2) ** 2
    grad = np.array([-2 * (1 - a) - 400 * a * (b - a ** 2), 200 * (b - a ** 2)])
    return value, grad


def test_one_dimensional_parabola():
    x, diag = minimize_bfgs(lambda x: ((x[0] - 1) ** 2, 2 * (x - 1)), np.array([5.0]), STRICT)
    assert diag.converged
    assert_equal(x[0], 1.0, 1e-8)


def test_rosenbrock():
    x, diag = minimize_bfgs(_rosenbrock, np.array([-1.2, 1.0]), STRICT)
    assert diag.converged
    assert_equal(x, 1.0, 1e-5)
    assert diag.n_evaluations >= diag.iterations


def test_iteration_limit_is_flagged():
    x, diag = minimize_bfgs(_rosenbrock, np.array([-1.2, 1.0]), SolverConfig(max_iters=3))
    assert diag.status is Status.MAX_ITERATIONS
    assert not diag.converged
    assert diag.iterations == 3


@pytest.mark.parametrize("search", list(LineSearch))
def test_history_is_monotone(search):
    _, diag = minimize_bfgs(_rosenbrock, np.array([-1.2, 1.0]), SolverConfig(line_search=search))
    assert len(diag.history) == diag.iterations + 1
    assert np.all(np.diff(diag.history) <= 0)


def test_quadratic_solves_linear_system(rng):
    A = _spd(rng, 8)
    b = rng.normal(size=8)
    x, diag = minimize_bfgs(_quadratic(A, b), rng.normal(size=8), STRICT)
    assert diag.converged
    assert_equal(x, np.linalg.solve(A, b), 1e-6)


def test_exact_line_search_terminates_on_quadratics(rng):
    for n in (2, 5, 10):
        A = _spd(rng, n)
        b = rng.normal(size=n)
        cfg = SolverConfig(line_search=LineSearch.EXACT, f_tol=0.0)
        x, diag = minimize_bfgs(_quadratic(A, b), rng.normal(size=n), cfg)
        assert diag.converged
        assert diag.iterations <= n + 1
        assert_equal(x, np.linalg.solve(A, b), 1e-6)


@pytest.mark.parametrize("search", list(LineSearch))
def test_line_search_failure(search):
    # gradient with the wrong sign: no step along -H g decreases f
    wrong = lambda x: (float(x @ x), -2 * x)
    x, diag = minimize_bfgs(wrong, np.array([1.0]), SolverConfig(line_search=search))
    assert diag.status is Status.LINE_SEARCH_FAILURE
    assert diag.fallbacks == 1
    assert diag.iterations == 0
    assert x[0] == 1.0


def test_already_stationary():
    x, diag = minimize_bfgs(lambda x: (float(x @ x), 2 * x), np.zeros(3))
    assert diag.status is Status.GRADIENT_TOLERANCE
    assert diag.iterations == 0


def test_finite_difference_gradient():
    fun = lambda x: float(np.sum(np.sin(x)))
    x = np.linspace(0, 1, 6)
    assert_equal(finite_difference_gradient(fun, x), np.cos(x), 1e-7)


def test_finite_difference_objective_minimizes(rng):
    A = _spd(rng, 4)
    b = rng.normal(size=4)
    value = lambda x: _quadratic(A, b)(x)[0]
    x, diag = minimize_bfgs(
        FiniteDifferenceObjective(value), np.zeros(4), SolverConfig(grad_tol=1e-6, f_tol=0.0)
    )
    assert diag.converged
    assert_equal(x, np.linalg.solve(A, b), 1e-5)


def test_grad_check(rng):
    A = _spd(rng, 6)
    b = rng.normal(size=6)
    x = 0.1 * rng.normal(size=6)
    assert grad_check(_quadratic(A, b), x) <= 1e-9
    broken = lambda x: (_quadratic(A, b)(x)[0], 1.1 * (A @ x - b))
    assert grad_check(broken, x) > 1e-2


def test_solver_config_validation():
    for kwargs in (
        {"mesh_schedule": ()},
        {"mesh_schedule": (2, 10)},
        {"mesh_schedule": (50, 40)},
        {"c1": 0.9, "c2": 0.1},
        {"grad_tol": 0.0},
        {"max_iters": 0},
        {"f_tol": -1.0},
        {"epsilon_schedule": (-1e-4,)},
        {"newton_iters": -1},
    ):
        with pytest.raises(MisconfigurationException):
            SolverConfig(**kwargs)


def test_smoothing_levels():
    cfg = SolverConfig(epsilon_schedule=(1e-8, 1e-4))
    assert cfg.smoothing_levels(1e-12) == [1e-4, 1e-8, 1e-12]
    assert cfg.smoothing_levels(1e-6) == [1e-4, 1e-6]
    assert cfg.smoothing_levels(0.1) == [0.1]
    assert SolverConfig(epsilon_schedule=()).smoothing_levels(0.0) == [0.0]


def test_initial_guess():
    with pytest.raises(MisconfigurationException):
        InitialGuess(InitKind.EXPLICIT)
    with pytest.raises(MisconfigurationException):
        InitialGuess(InitKind.RANDOM, amplitude=-0.1)

    assert np.all(InitialGuess().noise(5) == 0.0)
    a = InitialGuess(InitKind.RANDOM, seed=3, amplitude=0.2).noise(50)
    b = InitialGuess(InitKind.RANDOM, seed=3, amplitude=0.2).noise(50)
    c = InitialGuess(InitKind.RANDOM, seed=4, amplitude=0.2).noise(50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(np.abs(a) <= 0.2)

    theta = np.linspace(0, np.pi / 2, 5)
    InitialGuess(InitKind.EXPLICIT, profile=RadialProfile(theta, np.full(5, 0.5)))


def test_only_the_gradient_tolerance_counts_as_converged():
    assert Status.GRADIENT_TOLERANCE.converged
    for status in (Status.FUNCTION_TOLERANCE, Status.MAX_ITERATIONS, Status.LINE_SEARCH_FAILURE):
        assert not status.converged


def test_stagnation_is_not_convergence():
    # a huge f_tol stops after the first accepted step
    _, diag = minimize_bfgs(_rosenbrock, np.array([-1.2, 1.0]), SolverConfig(f_tol=1e6))
    assert diag.status is Status.FUNCTION_TOLERANCE
    assert not diag.converged


def _banded(n, bandwidth, rng):
    """SPD matrix with the given half bandwidth"""
    A = 4.0 * bandwidth * np.eye(n)
    for k in range(1, bandwidth + 1):
        off = rng.uniform(-1.0, 1.0, n - k)
        A += np.diag(off, k) + np.diag(off, -k)
    return A


def _convex(A, b):
    """0.5 x.A.x - b.x + sum(exp(x)), Hessian A + diag(exp(x))"""
    return lambda x: (
        0.5 * x @ A @ x - b @ x + np.sum(np.exp(x)),
        A @ x - b + np.exp(x),
    )


@pytest.mark.parametrize("bandwidth", [1, 2])
def test_banded_hessian_matches_dense(rng, bandwidth):
    n = 12
    A = _banded(n, bandwidth, rng)
    objective = _convex(A, rng.normal(size=n))
    x = 0.3 * rng.normal(size=n)
    band = banded_hessian(lambda z: objective(z)[1], x, bandwidth)
    dense = A + np.diag(np.exp(x))
    assert band.shape == (bandwidth + 1, n)
    for k in range(bandwidth + 1):
        assert_equal(band[k, : n - k], np.diag(dense, -k), 1e-4)
        assert np.all(band[k, n - k :] == 0.0)


def test_newton_refinement_reaches_tight_tolerance(rng):
    n = 30
    A = _banded(n, 1, rng)
    b = rng.normal(size=n)
    objective = _convex(A, b)
    x0, _ = minimize_bfgs(objective, np.zeros(n), SolverConfig(max_iters=5))
    x, diag = refine_newton(objective, x0, 1, SolverConfig(grad_tol=1e-12))
    assert diag.status is Status.GRADIENT_TOLERANCE
    assert diag.iterations <= 10
    assert np.max(np.abs(objective(x)[1])) <= 1e-12
    assert np.all(np.diff(diag.history) <= 1e-12)


def test_newton_refinement_shifts_indefinite_hessians():
    # double well per coordinate: the Hessian 3 x^2 - 1 is negative near zero
    objective = lambda x: (float(np.sum((x ** 2 - 1) ** 2) / 4), x ** 3 - x)
    x0 = np.array([0.1, 0.2, -0.3, 0.15, -0.25])
    x, diag = refine_newton(objective, x0, 1)
    assert diag.converged
    assert diag.fallbacks >= 1
    assert_equal(np.abs(x), 1.0, 1e-8)
    assert np.array_equal(np.sign(x), np.sign(x0))


def test_newton_refinement_can_be_switched_off():
    objective = lambda x: (float(x @ x), 2 * x)
    x, diag = refine_newton(objective, np.ones(3), 1, SolverConfig(newton_iters=0))
    assert diag.status is Status.MAX_ITERATIONS
    assert diag.iterations == 0
    assert np.array_equal(x, np.ones(3))


class _SineSum:
    """sum(x sin x) with a value function that accepts complex arguments"""

    def value(self, x):
        return np.sum(x * np.sin(x))

    def __call__(self, x):
        return float(self.value(x)), np.sin(x) + x * np.cos(x)


def test_complex_step_gradient():
    x = np.linspace(-1, 2, 7)
    assert_equal(complex_step_gradient(_SineSum().value, x), np.sin(x) + x * np.cos(x), 1e-14)


def test_grad_check_with_complex_step():
    objective = _SineSum()
    # a stationary point: central differences cannot resolve a zero gradient this well
    x = np.zeros(4)
    assert grad_check(objective, x, method=Difference.COMPLEX) <= 1e-12
    with pytest.raises(MisconfigurationException):
        grad_check(lambda x: (float(x @ x), 2 * x), x, method=Difference.COMPLEX)
