"""Energy functionals of the restricted configuration classes"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate
from shapely.geometry import Polygon

from smawalls.common.base import _Base
from smawalls.common.config import (
    BISECTOR_TOL,
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DEFAULT_K1,
    DEFAULT_MU,
)
from smawalls.common.exceptions import InvalidArgumentException
from smawalls.common.util import cos_exact

from .discretization import (
    cell_midpoints,
    derivative_matrix,
    midpoint_matrices,
    trapezoid_weights,
    uniform_grid,
)
from .fields import (
    PiecewiseConstantConfig,
    RadialProfile,
    RectangleConfig,
    Representation,
    curve_geometry,
    polar_geometry,
)
from .jump_energy import INFINITE, DensityKind, check_alpha, density, phi_angular

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ModelParams(_Base):
    K1: float = DEFAULT_K1
    mu: float = DEFAULT_MU
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.K1 > 0:
            raise InvalidArgumentException("K1 must be positive, got {}".format(self.K1))
        if not self.mu > 0:
            raise InvalidArgumentException("mu must be positive, got {}".format(self.mu))
        check_alpha(self.alpha)
        if not self.epsilon >= 0:
            raise InvalidArgumentException(
                "epsilon must be nonnegative, got {}".format(self.epsilon)
            )


@dataclass(frozen=True)
class EnergyBreakdown:
    elastic: float
    jump_interior: float
    jump_boundary: float

    @property
    def total(self) -> float:
        return self.elastic + self.jump_interior + self.jump_boundary

    def to_dict(self) -> Dict[str, float]:
        return {
            "elastic": self.elastic,
            "jump_interior": self.jump_interior,
            "jump_boundary": self.jump_boundary,
            "total": self.total,
        }


class BoundaryForm(Enum):
    POINTWISE = "pointwise"
    INTEGRAL = "integral"


class WeightFunction(Enum):
    """Weight g with g(0) = 1 and g(pi/2) = 0 for the integral boundary term"""

    LINEAR = "linear"
    COSINE = "cosine"

    def value(self, theta: np.ndarray) -> np.ndarray:
        if self is WeightFunction.LINEAR:
            return 1 - 2 * theta / np.pi
        return cos_exact(theta)

    def derivative(self, theta: np.ndarray) -> np.ndarray:
        if self is WeightFunction.LINEAR:
            return np.full_like(theta, -2 / np.pi)
        return -np.sin(theta)


@dataclass(frozen=True)
class BoundaryTermForm:
    tag: BoundaryForm = BoundaryForm.INTEGRAL
    g: WeightFunction = WeightFunction.LINEAR


def mismatch(theta, slope):
    """f = (u'^2 - 1) cos theta + 2 u' sin theta, zero where the curve bisects the layers"""
    return (np.square(slope) - 1) * cos_exact(theta) + 2 * np.multiply(slope, np.sin(theta))


def _quarter_grid(u: RadialProfile) -> None:
    if abs(u.lo) > 1e-12 or abs(u.hi - np.pi / 2) > 1e-12:
        raise InvalidArgumentException("Quarter-circle profiles must span [0, pi/2]")


class Correction:
    """An objective as a function of a correction x to a fixed point `base`

    Slopes are the slopes of the base plus those of x, so they resolve steps on
    the scale of doubles near the slope instead of doubles near u divided by h.
    `point(x)` rounds back to ordinary unknowns.
    """

    def __init__(self, objective, base: np.ndarray):
        self.objective = objective
        self.base = np.array(base, dtype=np.float64)
        self.hessian_bandwidth = objective.hessian_bandwidth

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        return self.objective.evaluate(self.base, x)

    def value(self, x: np.ndarray):
        return self.objective.value(self.base, x)

    def point(self, x: np.ndarray) -> np.ndarray:
        return self.base + x


class QuarterObjective:
    """Discretized quarter-circle energy as a function of the nodal values of u

    The jump terms live on the cells of the grid: u is averaged and differenced
    at the cell midpoints and the cell values are summed with the midpoint rule.
    The elastic term is the trapezoid rule on the nodes. Calling the objective
    returns the total energy and its exact gradient with respect to u; the
    quarter_* functionals evaluate the same sums.
    """

    hessian_bandwidth = 1

    def __init__(self, m: int, params: ModelParams, form: BoundaryTermForm):
        self.m = m
        self.params = params
        self.form = form
        self.theta = uniform_grid(0.0, np.pi / 2, m)
        self.h = (np.pi / 2) / (m - 1)
        self.w = trapezoid_weights(m, self.h)
        self.A, self.B = midpoint_matrices(m, self.h)
        self.t = cell_midpoints(0.0, np.pi / 2, m)
        self.cos = cos_exact(self.t)
        self.sin = np.sin(self.t)
        self.weight = self.cos ** params.alpha
        self.g = form.g.value(self.t)
        self.dg = form.g.derivative(self.t)

    def _state(self, base: np.ndarray, x: Optional[np.ndarray]):
        """(trapezoid integral of u, u at theta = 0, cell averages, cell slopes)"""
        parts = [self.w @ base, base[0], self.A @ base, self.B @ base]
        if x is not None:
            parts = [a + b for a, b in zip(parts, [self.w @ x, x[0], self.A @ x, self.B @ x])]
        return parts

    def _interior_cells(self, v, p):
        f = mismatch(self.t, p)
        Y = np.sqrt(p ** 2 + 1 + np.sqrt(self.params.epsilon + f ** 2))
        return self.h * self.params.mu * self.weight * np.exp(-v) * Y

    def _boundary_cells(self, v, p):
        return _SQRT2 * self.params.mu * self.h * np.exp(-v) * (p * self.g - self.dg)

    def _terms(self, integral, first, v, p):
        elastic = 0.5 * self.params.K1 * integral
        interior = np.sum(self._interior_cells(v, p))
        if self.form.tag is BoundaryForm.POINTWISE:
            boundary = _SQRT2 * self.params.mu * np.exp(-first)
        else:
            boundary = np.sum(self._boundary_cells(v, p))
        return elastic, interior, boundary

    def _gradient(self, first: float, v: np.ndarray, p: np.ndarray) -> np.ndarray:
        mu = self.params.mu
        f = mismatch(self.t, p)
        R = np.sqrt(self.params.epsilon + f ** 2)
        Y = np.sqrt(p ** 2 + 1 + R)
        scale = self.h * mu * self.weight * np.exp(-v)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(R > 0, f / R, 0.0)
        d_v = -scale * Y
        d_p = scale * (2 * p + slope * (2 * p * self.cos + 2 * self.sin)) / (2 * Y)

        if self.form.tag is BoundaryForm.INTEGRAL:
            d_v = d_v - self._boundary_cells(v, p)
            d_p = d_p + _SQRT2 * mu * self.h * np.exp(-v) * self.g
        grad = 0.5 * self.params.K1 * self.w + self.A.T @ d_v + self.B.T @ d_p
        if self.form.tag is BoundaryForm.POINTWISE:
            grad[0] -= _SQRT2 * mu * math.exp(-first)
        return grad

    def breakdown(self, u: np.ndarray) -> EnergyBreakdown:
        terms = self._terms(*self._state(np.asarray(u, dtype=np.float64), None))
        return EnergyBreakdown(*(float(t) for t in terms))

    def energy(self, u: np.ndarray) -> float:
        return self.breakdown(u).total

    def value(self, u: np.ndarray, x: Optional[np.ndarray] = None):
        """Total energy at u (+ x); complex arguments give the complex-step extension"""
        return sum(self._terms(*self._state(np.asarray(u), x)))

    def evaluate(self, u: np.ndarray, x: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
        integral, first, v, p = self._state(np.asarray(u, dtype=np.float64), x)
        value = sum(self._terms(integral, first, v, p))
        return float(value), self._gradient(first, v, p)

    def __call__(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        return self.evaluate(u)

    def around(self, u: np.ndarray) -> Correction:
        return Correction(self, u)


def quarter_elastic(u: RadialProfile, params: ModelParams) -> float:
    """(K1 / 2) times the trapezoid integral of u over [0, pi/2]"""
    _quarter_grid(u)
    return float(0.5 * params.K1 * (trapezoid_weights(u.m, u.h) @ u.u))


def quarter_jump_interior(u: RadialProfile, params: ModelParams) -> float:
    """Regularized jump energy of the curve inside the quarter disk

    mu * int cos^alpha e^(-u) (u'^2 + 1 + (eps + f^2)^(1/2))^(1/2) with
    f = (u'^2 - 1) cos + 2 u' sin, by the midpoint rule on the cells.
    """
    _quarter_grid(u)
    return QuarterObjective(u.m, params, BoundaryTermForm()).breakdown(u.u).jump_interior


def quarter_jump_boundary(u: RadialProfile, params: ModelParams, form: BoundaryTermForm) -> float:
    _quarter_grid(u)
    return QuarterObjective(u.m, params, form).breakdown(u.u).jump_boundary


def quarter_total(u: RadialProfile, params: ModelParams, form: BoundaryTermForm) -> EnergyBreakdown:
    _quarter_grid(u)
    return QuarterObjective(u.m, params, form).breakdown(u.u)


def quarter_jump_interior_geometric(u: RadialProfile, params: ModelParams) -> float:
    """Interior jump energy by integrating the envelope density along the curve

    Horizontal layers inside, radial directors outside; the normal and the
    arclength come from the curve geometry at the cell midpoints, where
    rho = e^(-v) and rho' = -rho p.
    """
    _quarter_grid(u)
    A, B = midpoint_matrices(u.m, u.h)
    t = cell_midpoints(0.0, np.pi / 2, u.m)
    rho = np.exp(-(A @ u.u))
    geometry = polar_geometry(t, rho, -rho * (B @ u.u))
    density = phi_angular(np.pi / 2, t, geometry.gamma, params.alpha)
    return float(params.mu * u.h * np.sum(density * geometry.arclength_density))


def rectangle_jump_energy(config: RectangleConfig, params: ModelParams) -> float:
    """mu times the trapezoid integral of the envelope density along the rectangle curve

    Circular layers (beta = theta) inside the curve, horizontal layers (beta = pi/2)
    outside; there is no elastic contribution.
    """
    profile = config.profile
    geometry = curve_geometry(profile, profile.theta)
    density = phi_angular(np.pi / 2, profile.theta, geometry.gamma, params.alpha)
    w = trapezoid_weights(profile.m, profile.h)
    return float(params.mu * (w @ (density * geometry.arclength_density)))


class RectangleObjective:
    """Regularized rectangle jump energy of the normalized interior unknowns

    Unknowns are rho / L (RHO) or -log(rho / L) (U) at the interior nodes; the end
    values are pinned to rho = L. The value is the energy divided by L.
    """

    hessian_bandwidth = 2

    def __init__(self, m: int, params: ModelParams, representation: Representation):
        self.m = m
        self.params = params
        self.representation = representation
        self.theta = uniform_grid(0.0, np.pi, m)
        self.h = np.pi / (m - 1)
        self.D = derivative_matrix(m, self.h)
        self.w = trapezoid_weights(m, self.h)
        self.cos = cos_exact(self.theta)
        self.sin = np.sin(self.theta)
        self.weight = np.abs(self.cos) ** params.alpha

    @property
    def pinned_value(self) -> float:
        return 1.0 if self.representation is Representation.RHO else 0.0

    def expand(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([[self.pinned_value], x, [self.pinned_value]])

    def normalized_rho(self, x: np.ndarray) -> np.ndarray:
        full = self.expand(x)
        return full if self.representation is Representation.RHO else np.exp(-full)

    def _state(self, base: np.ndarray, x: Optional[np.ndarray]):
        """(rho, D rho) at base (+ x), with the increment of rho formed from x alone"""
        rho = self.normalized_rho(base)
        if x is None:
            return rho, self.D @ rho
        if self.representation is Representation.RHO:
            delta = np.concatenate([[0.0], x, [0.0]])
        else:
            delta = rho * np.expm1(-np.concatenate([[0.0], x, [0.0]]))
        return rho + delta, self.D @ rho + self.D @ delta

    def _root(self, rho, p):
        S2 = rho ** 2 + p ** 2
        G = self.cos * (rho ** 2 - p ** 2) + 2 * self.sin * rho * p
        Z = np.sqrt(self.params.epsilon * S2 ** 2 + G ** 2)
        return S2, G, Z

    def value(self, x: np.ndarray, dx: Optional[np.ndarray] = None):
        """Energy / L at x (+ dx); complex arguments give the complex-step extension"""
        rho, p = self._state(np.asarray(x), dx)
        S2, _, Z = self._root(rho, p)
        return self.w @ (self.params.mu * self.weight * np.sqrt(S2 + Z))

    def evaluate(self, x: np.ndarray, dx: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
        rho, p = self._state(np.asarray(x, dtype=np.float64), dx)
        c, s, eps = self.cos, self.sin, self.params.epsilon
        S2, G, Z = self._root(rho, p)
        root = np.sqrt(S2 + Z)
        F = self.params.mu * self.weight * root

        G_rho = 2 * c * rho + 2 * s * p
        G_p = -2 * c * p + 2 * s * rho
        safe = np.where(Z > 0, Z, 1.0)
        T_rho = 2 * rho + np.where(Z > 0, (2 * eps * S2 * rho + G * G_rho) / safe, 0.0)
        T_p = 2 * p + np.where(Z > 0, (2 * eps * S2 * p + G * G_p) / safe, 0.0)
        F_rho = self.params.mu * self.weight * T_rho / (2 * root)
        F_p = self.params.mu * self.weight * T_p / (2 * root)

        grad = self.w * F_rho + self.D.T @ (self.w * F_p)
        if self.representation is Representation.U:
            grad = -rho * grad
        return float(self.w @ F), grad[1:-1]

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        return self.evaluate(x)

    def around(self, x: np.ndarray) -> Correction:
        return Correction(self, x)


def partition_energy(
    config: PiecewiseConstantConfig,
    params: ModelParams,
    kind: DensityKind,
    tol: float = BISECTOR_TOL,
    window: Optional[Polygon] = None,
) -> float:
    """Sum over interface segments of length times mu times the jump density

    Args:
        config (PiecewiseConstantConfig): The partition
        params (ModelParams): Model parameters (mu, alpha are used)
        kind (DensityKind): Singular or envelope density
        tol (float): Bisector tolerance of the singular density
        window (Polygon): Only the part of the jump set inside this closed set
            (geometry frame) is counted

    Returns:
        energy (float): The energy, INFINITE if a segment of positive length violates
            the bisector condition under the singular density
    """
    total = 0.0
    for seg in config.interfaces:
        length = seg.line.intersection(window).length if window is not None else seg.length
        if length <= 0:
            continue
        value = density(seg.triple, params.alpha, kind, tol)
        if value == INFINITE:
            return INFINITE
        total += length * params.mu * value
    return total


def parabola_baseline(L: float, params: ModelParams) -> float:
    """Adaptive-quadrature rectangle energy of rho = L / (1 + sin theta)

    The curve bisects the layers, so the density reduces to |cos theta|^alpha and
    the arclength density to L sqrt(2) (1 + sin theta)^(-3/2).
    """
    integrand = lambda t: abs(math.cos(t)) ** params.alpha * (1 + math.sin(t)) ** -1.5
    value, _ = integrate.quad(integrand, 0.0, np.pi, points=[np.pi / 2], limit=200)
    return params.mu * L * _SQRT2 * value


def half_circle_baseline(L: float, params: ModelParams) -> float:
    """Adaptive-quadrature rectangle energy of the half circle rho = L"""
    integrand = lambda t: abs(math.cos(t)) ** params.alpha * math.sqrt(1 + abs(math.cos(t)))
    value, _ = integrate.quad(integrand, 0.0, np.pi, points=[np.pi / 2], limit=200)
    return params.mu * L * value
