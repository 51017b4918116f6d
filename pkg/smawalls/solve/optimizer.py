"""Quasi-Newton minimization and gradient verification"""

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import linalg, optimize

from smawalls.common.base import _Base
from smawalls.common.config import (
    BACKTRACK_MAX_HALVINGS,
    BACKTRACK_SHRINK,
    COMPLEX_STEP,
    DEFAULT_F_TOL,
    DEFAULT_GRAD_TOL,
    DEFAULT_MAX_ITERS,
    DEFAULT_MESH_SCHEDULE,
    EXACT_SEARCH_MAX_DOUBLINGS,
    FD_FLOOR,
    FD_STEP,
    HESSIAN_FD_STEP,
    LINE_SEARCH_MAX_STEP,
    MIN_GRID_POINTS,
    NEWTON_MAX_ITERS,
    NEWTON_MAX_SHIFTS,
    NEWTON_SHIFT_START,
    SMOOTHING_LEVELS,
    WOLFE_C1,
    WOLFE_C2,
)
from smawalls.common.exceptions import MisconfigurationException
from smawalls.common.types import Objective
from smawalls.model.fields import RadialProfile, Representation


class LineSearch(Enum):
    WOLFE = "wolfe"
    EXACT = "exact"


class Status(Enum):
    GRADIENT_TOLERANCE = "gradient_tolerance"
    FUNCTION_TOLERANCE = "function_tolerance"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILURE = "line_search_failure"

    @property
    def converged(self) -> bool:
        return self is Status.GRADIENT_TOLERANCE


class Difference(Enum):
    CENTRAL = "central"
    COMPLEX = "complex"  # imaginary part of f(x + i h e_k) / h, free of cancellation


class GradientMode(Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "fd"


class InitKind(Enum):
    CONSTANT = "constant"
    RANDOM = "random"
    EXPLICIT = "file"


@dataclass(frozen=True, eq=False)
class InitialGuess(_Base):
    """First-stage initial guess

    CONSTANT uses `value` everywhere (the problem default if None), RANDOM adds
    uniform noise in [-amplitude, amplitude] drawn with `seed`, EXPLICIT resamples
    `profile` onto the first mesh.
    """

    kind: InitKind = InitKind.CONSTANT
    value: Optional[float] = None
    seed: int = 0
    amplitude: float = 0.1
    profile: Optional[RadialProfile] = None

    def __post_init__(self):
        if self.kind is InitKind.EXPLICIT and self.profile is None:
            raise MisconfigurationException("An explicit initial guess needs a profile")
        if not self.amplitude >= 0:
            raise MisconfigurationException("The noise amplitude must be nonnegative")

    def noise(self, size: int) -> np.ndarray:
        if self.kind is not InitKind.RANDOM:
            return np.zeros(size)
        rng = np.random.default_rng(self.seed)
        return rng.uniform(-self.amplitude, self.amplitude, size)


@dataclass(frozen=True, eq=False)
class SolverConfig(_Base):
    mesh_schedule: Tuple[int, ...] = DEFAULT_MESH_SCHEDULE
    grad_tol: float = DEFAULT_GRAD_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    f_tol: float = DEFAULT_F_TOL
    c1: float = WOLFE_C1
    c2: float = WOLFE_C2
    line_search: LineSearch = LineSearch.WOLFE
    gradient: GradientMode = GradientMode.ANALYTIC
    initial_guess: InitialGuess = field(default_factory=InitialGuess)
    epsilon_schedule: Tuple[float, ...] = SMOOTHING_LEVELS
    representation: Representation = Representation.RHO
    newton_iters: int = NEWTON_MAX_ITERS

    def __post_init__(self):
        schedule = tuple(int(m) for m in self.mesh_schedule)
        object.__setattr__(self, "mesh_schedule", schedule)
        object.__setattr__(
            self, "epsilon_schedule", tuple(float(e) for e in self.epsilon_schedule)
        )
        if len(schedule) == 0:
            raise MisconfigurationException("The mesh schedule must not be empty")
        if schedule[0] < MIN_GRID_POINTS:
            raise MisconfigurationException(
                "Meshes need at least {:d} points".format(MIN_GRID_POINTS)
            )
        if any(b <= a for a, b in zip(schedule[:-1], schedule[1:])):
            raise MisconfigurationException(
                "The mesh schedule must be strictly increasing, got {}".format(schedule)
            )
        if not 0 < self.c1 < self.c2 < 1:
            raise MisconfigurationException(
                "Wolfe parameters must satisfy 0 < c1 < c2 < 1, got c1={}, c2={}".format(
                    self.c1, self.c2
                )
            )
        if not self.grad_tol > 0:
            raise MisconfigurationException("grad_tol must be positive")
        if not self.f_tol >= 0:
            raise MisconfigurationException("f_tol must be nonnegative")
        if self.max_iters < 1:
            raise MisconfigurationException("max_iters must be at least 1")
        if self.newton_iters < 0:
            raise MisconfigurationException("newton_iters must be nonnegative")
        if any(e < 0 for e in self.epsilon_schedule):
            raise MisconfigurationException("Smoothing levels must be nonnegative")

    def smoothing_levels(self, target: float) -> List[float]:
        """Regularization levels of one mesh stage, coarsest first, ending with target"""
        return sorted((e for e in set(self.epsilon_schedule) if e > target), reverse=True) + [
            target
        ]


@dataclass
class Diagnostics:
    status: Status
    iterations: int
    n_evaluations: int
    fun: float
    grad_norm: float
    fallbacks: int = 0
    history: List[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status.converged


class _Memoized:
    """Caches the last (value, gradient) evaluation of an objective"""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.n_evaluations = 0
        self._x = None
        self._f = None
        self._g = None

    def _evaluate(self, x: np.ndarray) -> None:
        if self._x is None or not np.array_equal(x, self._x):
            f, g = self.objective(x)
            self._x = np.array(x, dtype=np.float64)
            self._f = float(f)
            self._g = np.asarray(g, dtype=np.float64)
            self.n_evaluations += 1

    def value(self, x: np.ndarray) -> float:
        self._evaluate(x)
        return self._f

    def gradient(self, x: np.ndarray) -> np.ndarray:
        self._evaluate(x)
        return self._g


_Step = Optional[Tuple[float, float, np.ndarray]]


def _wolfe_step(fun: _Memoized, x, p, f, g, old_old_f, c1, c2) -> _Step:
    with warnings.catch_warnings():
        # LineSearchWarning is a RuntimeWarning; failures are reported by alpha = None
        warnings.simplefilter("ignore", RuntimeWarning)
        alpha, _, _, f_new, _, _ = optimize.line_search(
            fun.value,
            fun.gradient,
            x,
            p,
            gfk=g,
            old_fval=f,
            old_old_fval=old_old_f,
            c1=c1,
            c2=c2,
            amax=LINE_SEARCH_MAX_STEP,
        )
    if alpha is None or f_new is None or not np.isfinite(f_new):
        return None
    return alpha, float(f_new), fun.gradient(x + alpha * p)


def _exact_step(fun: _Memoized, x, p, f, g) -> _Step:
    """Minimize along p by bracketing the root of the directional derivative"""
    slope = lambda a: float(fun.gradient(x + a * p) @ p)
    if not g @ p < 0:
        return None

    lo, hi = 0.0, 1.0
    for _ in range(EXACT_SEARCH_MAX_DOUBLINGS):
        if slope(hi) >= 0:
            break
        lo, hi = hi, 2 * hi
    else:
        return None

    alpha = optimize.brentq(slope, lo, hi, xtol=1e-15)
    f_new = fun.value(x + alpha * p)
    if not f_new <= f:
        return None
    return alpha, f_new, fun.gradient(x + alpha * p)


def _backtracking_step(fun: _Memoized, x, p, f, g, c1) -> _Step:
    slope = g @ p
    alpha = 1.0
    for _ in range(BACKTRACK_MAX_HALVINGS):
        trial = x + alpha * p
        if np.array_equal(trial, x):
            # step below rounding
            return None
        f_new = fun.value(trial)
        if np.isfinite(f_new) and f_new <= f + c1 * alpha * slope:
            return alpha, f_new, fun.gradient(trial)
        alpha *= BACKTRACK_SHRINK
    return None


def _update_inverse_hessian(
    H: np.ndarray, s: np.ndarray, y: np.ndarray, initial: bool
) -> Tuple[np.ndarray, bool]:
    ys = y @ s
    if not ys > 0:
        logging.debug("Skipping BFGS update with nonpositive curvature y.s = {:.3e}".format(ys))
        return H, initial
    if initial:
        H = (ys / (y @ y)) * np.eye(s.size)
    rho = 1.0 / ys
    Hy = H @ y
    H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
    H += (rho ** 2 * (y @ Hy) + rho) * np.outer(s, s)
    return H, False


def minimize_bfgs(
    objective: Objective, x0: np.ndarray, cfg: Optional[SolverConfig] = None
) -> Tuple[np.ndarray, Diagnostics]:
    """Minimize a smooth function with the BFGS quasi-Newton method

    The inverse Hessian approximation starts at the identity and is rescaled
    before the first update. If the line search fails, the approximation is
    reset and one steepest-descent step is tried (line search, then Armijo
    backtracking); a second failure stops the iteration.

    Args:
        objective (Objective): Function returning (value, gradient)
        x0 (np.ndarray): Starting point
        cfg (SolverConfig): Tolerances, iteration limit and line search

    Returns:
        x (np.ndarray): The final iterate
        diagnostics (Diagnostics): Status, counts and the accepted objective values
    """
    cfg = cfg if cfg is not None else SolverConfig()
    fun = _Memoized(objective)

    x = np.array(x0, dtype=np.float64).ravel()
    f = fun.value(x)
    g = fun.gradient(x)
    H = np.eye(x.size)
    initial = True
    old_old_f = f + np.linalg.norm(g) / 2

    def search(p):
        if cfg.line_search is LineSearch.EXACT:
            return _exact_step(fun, x, p, f, g)
        return _wolfe_step(fun, x, p, f, g, old_old_f, cfg.c1, cfg.c2)

    history = [f]
    fallbacks = 0
    iterations = 0
    gnorm = float(np.max(np.abs(g)))
    status = Status.GRADIENT_TOLERANCE if gnorm <= cfg.grad_tol else Status.MAX_ITERATIONS

    while status is Status.MAX_ITERATIONS and iterations < cfg.max_iters:
        p = -H @ g
        step = search(p)
        if step is None:
            fallbacks += 1
            logging.debug(
                "Line search failed at iteration {:d}, trying steepest descent".format(iterations)
            )
            H, initial = np.eye(x.size), True
            p = -g
            step = search(p)
            if step is None:
                step = _backtracking_step(fun, x, p, f, g, cfg.c1)
            if step is None:
                status = Status.LINE_SEARCH_FAILURE
                break

        alpha, f_new, g_new = step
        s = alpha * p
        y = g_new - g
        decrease = f - f_new
        x, g = x + s, g_new
        old_old_f, f = f, f_new
        history.append(f)
        iterations += 1

        gnorm = float(np.max(np.abs(g)))
        if gnorm <= cfg.grad_tol:
            status = Status.GRADIENT_TOLERANCE
        elif decrease <= cfg.f_tol * (1 + abs(f)):
            status = Status.FUNCTION_TOLERANCE
        else:
            H, initial = _update_inverse_hessian(H, s, y, initial)

    return x, Diagnostics(status, iterations, fun.n_evaluations, f, gnorm, fallbacks, history)


def banded_hessian(
    gradient: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    bandwidth: int,
    step: float = HESSIAN_FD_STEP,
) -> np.ndarray:
    """Symmetric banded Hessian from central differences of the gradient

    Columns 2 bandwidth + 1 apart touch disjoint rows and are perturbed together,
    so the cost is 2 (2 bandwidth + 1) gradient evaluations.

    Args:
        gradient (Callable): Gradient of the objective
        x (np.ndarray): Evaluation point
        bandwidth (int): Number of nonzero off-diagonals on each side
        step (float): Difference step

    Returns:
        band (np.ndarray): (bandwidth + 1, n) lower form, band[k, j] = H[j + k, j]
    """
    x = np.array(x, dtype=np.float64)
    n = x.size
    width = 2 * bandwidth + 1
    band = np.zeros((bandwidth + 1, n))
    for start in range(min(width, n)):
        columns = np.arange(start, n, width)
        e = np.zeros(n)
        e[columns] = step
        diff = (np.asarray(gradient(x + e)) - np.asarray(gradient(x - e))) / (2 * step)
        for j in columns:
            band[0, j] += diff[j]
            for k in range(1, bandwidth + 1):
                # each off-diagonal entry is the mean of its two estimates
                if j + k < n:
                    band[k, j] += diff[j + k] / 2
                if j - k >= 0:
                    band[k, j - k] += diff[j - k] / 2
    return band


def _newton_direction(band: np.ndarray, g: np.ndarray) -> Tuple[Optional[np.ndarray], int]:
    """Solve (H + lambda I) p = -g, raising lambda until the Cholesky factorization exists"""
    shift, shifts = 0.0, 0
    start = NEWTON_SHIFT_START * max(float(np.max(np.abs(band[0]))), 1.0)
    for _ in range(NEWTON_MAX_SHIFTS):
        shifted = band.copy()
        shifted[0] += shift
        try:
            factor = linalg.cholesky_banded(shifted, lower=True)
        except linalg.LinAlgError:
            shift = start if shift == 0 else 10 * shift
            shifts += 1
            continue
        return -linalg.cho_solve_banded((factor, True), g), shifts
    return None, shifts


def _newton_step(fun: _Memoized, x, p, f, g, c1, f_tol) -> _Step:
    """Armijo backtracking; a step that keeps f within rounding but shrinks |g| is also taken"""
    slope = g @ p
    gnorm = np.max(np.abs(g))
    alpha = 1.0
    for _ in range(BACKTRACK_MAX_HALVINGS):
        trial = x + alpha * p
        if np.array_equal(trial, x):
            return None
        f_new = fun.value(trial)
        if np.isfinite(f_new):
            if f_new <= f + c1 * alpha * slope:
                return alpha, f_new, fun.gradient(trial)
            if f_new <= f + f_tol * (1 + abs(f)):
                g_new = fun.gradient(trial)
                if np.max(np.abs(g_new)) < gnorm:
                    return alpha, f_new, g_new
        alpha *= BACKTRACK_SHRINK
    return None


def refine_newton(
    objective: Objective, x0: np.ndarray, bandwidth: int, cfg: Optional[SolverConfig] = None
) -> Tuple[np.ndarray, Diagnostics]:
    """Damped Newton iteration with a banded finite-difference Hessian

    Used after BFGS on objectives whose Hessian is banded. Where the Hessian is
    not positive definite a Levenberg shift is added; `fallbacks` counts the shifts.

    Args:
        objective (Objective): Function returning (value, gradient)
        x0 (np.ndarray): Starting point, usually the BFGS iterate
        bandwidth (int): Half bandwidth of the Hessian
        cfg (SolverConfig): grad_tol, f_tol, c1 and newton_iters are used

    Returns:
        x (np.ndarray): The final iterate
        diagnostics (Diagnostics): Status, Newton iterations and accepted objective values
    """
    cfg = cfg if cfg is not None else SolverConfig()
    fun = _Memoized(objective)

    x = np.array(x0, dtype=np.float64).ravel()
    f = fun.value(x)
    g = fun.gradient(x)
    history = [f]
    shifts = 0
    iterations = 0
    gnorm = float(np.max(np.abs(g)))
    status = Status.GRADIENT_TOLERANCE if gnorm <= cfg.grad_tol else Status.MAX_ITERATIONS

    while status is Status.MAX_ITERATIONS and iterations < cfg.newton_iters:
        band = banded_hessian(lambda z: objective(z)[1], x, bandwidth)
        p, used = _newton_direction(band, g)
        shifts += used
        step = None if p is None else _newton_step(fun, x, p, f, g, cfg.c1, cfg.f_tol)
        if step is None:
            status = Status.LINE_SEARCH_FAILURE
            break
        alpha, f, g = step
        x = x + alpha * p
        history.append(f)
        iterations += 1
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= cfg.grad_tol:
            status = Status.GRADIENT_TOLERANCE

    n_evaluations = fun.n_evaluations + 2 * min(2 * bandwidth + 1, x.size) * iterations
    return x, Diagnostics(status, iterations, n_evaluations, f, gnorm, shifts, history)


def finite_difference_gradient(
    fun: Callable[[np.ndarray], float], x: np.ndarray, step: float = FD_STEP
) -> np.ndarray:
    """Central differences (f(x + h e_i) - f(x - h e_i)) / 2h"""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (fun(x + e) - fun(x - e)) / (2 * step)
    return grad


class FiniteDifferenceObjective:
    """Objective with a value-only function and a central difference gradient"""

    def __init__(self, fun: Callable[[np.ndarray], float], step: float = FD_STEP):
        self.fun = fun
        self.step = step

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        return float(self.fun(x)), finite_difference_gradient(self.fun, x, self.step)


def complex_step_gradient(
    fun: Callable[[np.ndarray], complex], x: np.ndarray, step: float = COMPLEX_STEP
) -> np.ndarray:
    """Im f(x + i h e_k) / h for a value function that accepts complex arguments"""
    x = np.array(x, dtype=np.complex128)
    grad = np.zeros(x.size)
    for k in range(x.size):
        z = x.copy()
        z[k] += 1j * step
        grad[k] = np.imag(fun(z)) / step
    return grad


def grad_check(
    objective: Objective,
    x: np.ndarray,
    step: float = FD_STEP,
    floor: float = FD_FLOOR,
    method: Difference = Difference.CENTRAL,
) -> float:
    """Largest deviation of the gradient from a difference approximation

    Central differences cannot resolve a gradient of order grad_tol at a computed
    minimizer; the complex step can, but needs an objective with a `value` method
    that accepts complex arguments.

    Args:
        objective (Objective): Function returning (value, gradient)
        x (np.ndarray): Evaluation point
        step (float): Difference step of the central differences
        floor (float): Lower bound of the normalization
        method (Difference): Central differences or complex step

    Returns:
        error (float): max_i |g_i - g_fd_i| / max(|g_fd|_inf, floor)
    """
    x = np.array(x, dtype=np.float64)
    _, g = objective(x)
    if method is Difference.COMPLEX:
        if not hasattr(objective, "value"):
            raise MisconfigurationException("The complex step needs a complex value function")
        g_fd = complex_step_gradient(objective.value, x)
    else:
        g_fd = finite_difference_gradient(lambda z: objective(z)[0], x, step)
    return float(np.max(np.abs(np.asarray(g) - g_fd)) / max(np.max(np.abs(g_fd)), floor))
