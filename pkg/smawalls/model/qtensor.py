"""Algebra of normalized two-dimensional uniaxial Q-tensors"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from smawalls.common.config import MANIFOLD_TOL, PARSED_MANIFOLD_TOL
from smawalls.common.exceptions import InvalidArgumentException, ManifoldViolation
from smawalls.common.util import wrap_angle

# |Q|^2 = 2 (q11^2 + q12^2) = 1/4 on the manifold
MANIFOLD_RADIUS_SQUARED = 1.0 / 8.0
_SQRT2 = math.sqrt(2.0)


def canonical_angle(beta: float) -> float:
    """Representative of a director angle in [0, pi) (n and -n are identified)"""
    return wrap_angle(beta, np.pi)


@dataclass(frozen=True)
class QTensor:
    """Trace-free symmetric tensor [[q11, q12], [q12, -q11]]

    Tensors built from an angle lie on the manifold up to rounding. Tensors built
    from user input should go through `QTensor.parse`, which enforces membership.
    """

    q11: float
    q12: float

    @classmethod
    def parse(cls, q11: float, q12: float, tol: float = PARSED_MANIFOLD_TOL):
        q = cls(float(q11), float(q12))
        q.check(tol)
        return q

    @property
    def deviation(self) -> float:
        """Distance of q11^2 + q12^2 from its manifold value 1/8"""
        return abs(self.q11 ** 2 + self.q12 ** 2 - MANIFOLD_RADIUS_SQUARED)

    def check(self, tol: float = MANIFOLD_TOL) -> None:
        if not self.deviation <= tol:
            raise ManifoldViolation(
                "Q-tensor ({}, {}) violates q11^2 + q12^2 = 1/8 by {:.3e} (tolerance {:.1e})".format(
                    self.q11, self.q12, self.deviation, tol
                )
            )

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, -self.q11]])

    @property
    def angle(self) -> float:
        return angle_from_q(self)

    def rotated(self, delta: float) -> "QTensor":
        """Tensor of the director rotated by delta"""
        c, s = math.cos(2 * delta), math.sin(2 * delta)
        return QTensor(c * self.q11 - s * self.q12, s * self.q11 + c * self.q12)


@dataclass(frozen=True)
class UnitVector:
    """Unit normal stored by its components, so that negation is exact"""

    x: float
    y: float

    @classmethod
    def from_angle(cls, gamma: float) -> "UnitVector":
        return cls(math.cos(gamma), math.sin(gamma))

    @property
    def gamma(self) -> float:
        return math.atan2(self.y, self.x)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def __neg__(self) -> "UnitVector":
        return UnitVector(-self.x, -self.y)

    def rotated(self, delta: float) -> "UnitVector":
        c, s = math.cos(delta), math.sin(delta)
        return UnitVector(c * self.x - s * self.y, s * self.x + c * self.y)


def q_from_angle(beta: float) -> QTensor:
    """Q = (n x n - I/2) / sqrt(2) for the director n = (cos beta, sin beta)

    Args:
        beta (float): Director angle in radians, any representative modulo pi

    Returns:
        tensor (QTensor): The Q-tensor on the manifold
    """
    return QTensor(
        math.cos(2 * beta) / (2 * _SQRT2), math.sin(2 * beta) / (2 * _SQRT2)
    )


def angle_from_q(q: QTensor) -> float:
    """Director angle of a Q-tensor, reported in [0, pi)

    Args:
        q (QTensor): Tensor on the manifold (up to PARSED_MANIFOLD_TOL)

    Returns:
        beta (float): The director angle
    """
    q.check(PARSED_MANIFOLD_TOL)
    return canonical_angle(math.atan2(q.q12, q.q11) / 2)


def q_distance(qp: QTensor, qm: QTensor) -> float:
    """Frobenius distance |Q+ - Q-|, equal to |sin(beta+ - beta-)| on the manifold"""
    return math.sqrt(2 * ((qp.q11 - qm.q11) ** 2 + (qp.q12 - qm.q12) ** 2))


def q_normal_form(q: QTensor, nu: UnitVector) -> float:
    """Contraction nu . (Q nu)"""
    return q.q11 * (nu.x ** 2 - nu.y ** 2) + 2 * q.q12 * nu.x * nu.y


@dataclass(frozen=True, eq=False)
class SampledField:
    """Q-tensor field on a rectangular lattice

    Arrays are indexed [iy, ix]. jump_mask marks the lattice cells crossed by the
    jump set and has one entry less than the lattice along both axes.
    """

    x: np.ndarray
    y: np.ndarray
    q11: np.ndarray
    q12: np.ndarray
    jump_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("x", "y", "q11", "q12"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=np.float64)
            )
        shape = (self.y.size, self.x.size)
        if self.x.size < 3 or self.y.size < 3:
            raise InvalidArgumentException("A sampled field needs at least 3x3 points")
        if self.q11.shape != shape or self.q12.shape != shape:
            raise InvalidArgumentException(
                "Field values must have shape {}, got {} and {}".format(
                    shape, self.q11.shape, self.q12.shape
                )
            )
        if np.any(np.diff(self.x) <= 0) or np.any(np.diff(self.y) <= 0):
            raise InvalidArgumentException("Lattice coordinates must be increasing")

        mask = self.jump_mask
        if mask is None:
            mask = np.zeros((shape[0] - 1, shape[1] - 1), dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (shape[0] - 1, shape[1] - 1):
            raise InvalidArgumentException("jump_mask must have one cell per lattice cell")
        object.__setattr__(self, "jump_mask", mask)

        deviation = np.abs(self.q11 ** 2 + self.q12 ** 2 - MANIFOLD_RADIUS_SQUARED)
        if np.max(deviation) > MANIFOLD_TOL:
            raise ManifoldViolation(
                "Sampled field leaves the manifold by {:.3e}".format(np.max(deviation))
            )

    @classmethod
    def from_angles(
        cls,
        x: np.ndarray,
        y: np.ndarray,
        beta: np.ndarray,
        jump_mask: Optional[np.ndarray] = None,
    ) -> "SampledField":
        beta = np.asarray(beta, dtype=np.float64)
        return cls(
            x,
            y,
            np.cos(2 * beta) / (2 * _SQRT2),
            np.sin(2 * beta) / (2 * _SQRT2),
            jump_mask,
        )

    @classmethod
    def from_director(
        cls,
        x: np.ndarray,
        y: np.ndarray,
        director: Callable[[np.ndarray, np.ndarray], np.ndarray],
        jump_mask: Optional[np.ndarray] = None,
    ) -> "SampledField":
        """Sample a director angle function beta(X, Y) on the lattice"""
        X, Y = np.meshgrid(x, y)
        return cls.from_angles(x, y, director(X, Y), jump_mask)

    @property
    def skipped(self) -> np.ndarray:
        """Lattice points whose difference stencil touches a jump-masked cell"""
        m = self.jump_mask
        touched = np.zeros((self.y.size, self.x.size), dtype=bool)
        touched[:-1, :-1] |= m
        touched[1:, :-1] |= m
        touched[:-1, 1:] |= m
        touched[1:, 1:] |= m
        return touched


def constraint_residual(field: SampledField) -> np.ma.MaskedArray:
    """Layer-thickness constraint A(Q)(grad Q, grad Q) at every lattice point

    The residual is sum_hk (sqrt(2) Q_hk + delta_hk / 2) Q_ij,h Q_ij,k with second
    order central differences. Lattice boundary points and points whose stencil
    crosses a jump-masked cell are masked.

    Args:
        field (SampledField): The sampled configuration

    Returns:
        residual (np.ma.MaskedArray): Residual per lattice point
    """
    q11, q12 = field.q11, field.q12
    dx = np.diff(field.x)[None, :]
    dy = np.diff(field.y)[:, None]
    hx = dx[:, :-1] + dx[:, 1:]
    hy = dy[:-1, :] + dy[1:, :]

    d11x = (q11[1:-1, 2:] - q11[1:-1, :-2]) / hx
    d12x = (q12[1:-1, 2:] - q12[1:-1, :-2]) / hx
    d11y = (q11[2:, 1:-1] - q11[:-2, 1:-1]) / hy
    d12y = (q12[2:, 1:-1] - q12[:-2, 1:-1]) / hy

    # Gram matrix of the tensor gradient: sum_ij Q_ij,h Q_ij,k
    g_xx = 2 * (d11x ** 2 + d12x ** 2)
    g_xy = 2 * (d11x * d11y + d12x * d12y)
    g_yy = 2 * (d11y ** 2 + d12y ** 2)

    c11 = q11[1:-1, 1:-1]
    c12 = q12[1:-1, 1:-1]
    inner = (
        (_SQRT2 * c11 + 0.5) * g_xx
        + 2 * _SQRT2 * c12 * g_xy
        + (-_SQRT2 * c11 + 0.5) * g_yy
    )

    values = np.zeros_like(q11)
    values[1:-1, 1:-1] = inner
    mask = np.ones_like(q11, dtype=bool)
    mask[1:-1, 1:-1] = False
    skipped = field.skipped & ~mask
    if np.any(skipped):
        logging.debug(
            "Skipping {:d} lattice points next to the jump set".format(int(skipped.sum()))
        )
    return np.ma.masked_array(values, mask=mask | field.skipped)


def residual_magnitude(residual: np.ma.MaskedArray) -> np.ma.MaskedArray:
    """Square root of the (nonnegative) residual, i.e. sqrt(2) |d_n Q| for layer fields"""
    return np.ma.sqrt(np.ma.maximum(residual, 0.0))
