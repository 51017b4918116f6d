"""Jump energy densities on the Q-tensor manifold and their symmetries"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

from smawalls.common.config import BISECTOR_TOL, FORM_AGREEMENT_TOL, ZERO_JUMP_TOL
from smawalls.common.exceptions import DegenerateJump, InvalidArgumentException
from smawalls.common.types import ArrayOrFloat

from .qtensor import (
    QTensor,
    UnitVector,
    angle_from_q,
    q_distance,
    q_from_angle,
    q_normal_form,
)

INFINITE = math.inf
"""Value of the singular density off the bisector set"""


class DensityKind(Enum):
    SINGULAR = "singular"
    ENVELOPE = "envelope"


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentException(
            "alpha must lie in the open interval (0, 1), got {}".format(alpha)
        )
    return float(alpha)


@dataclass(frozen=True)
class JumpTriple:
    """Arguments (Q+, Q-, nu) of a jump density; nu points towards the Q+ side"""

    q_plus: QTensor
    q_minus: QTensor
    nu: UnitVector

    @classmethod
    def from_angles(cls, beta_plus: float, beta_minus: float, gamma: float):
        return cls(
            q_from_angle(beta_plus), q_from_angle(beta_minus), UnitVector.from_angle(gamma)
        )

    def swapped(self) -> "JumpTriple":
        """The same jump seen from the other side"""
        return JumpTriple(self.q_minus, self.q_plus, -self.nu)

    def rotated(self, delta: float) -> "JumpTriple":
        return JumpTriple(
            self.q_plus.rotated(delta), self.q_minus.rotated(delta), self.nu.rotated(delta)
        )

    @property
    def distance(self) -> float:
        return q_distance(self.q_plus, self.q_minus)

    @property
    def normal_jump(self) -> float:
        """Q+ nu.nu - Q- nu.nu, which vanishes exactly on the bisectors"""
        return q_normal_form(self.q_plus, self.nu) - q_normal_form(self.q_minus, self.nu)


def zeta(t: JumpTriple, alpha: float, tol: float = BISECTOR_TOL) -> float:
    """Singular density: |Q+ - Q-|^alpha on the bisectors, infinite elsewhere

    Args:
        t (JumpTriple): The jump
        alpha (float): Exponent in (0, 1)
        tol (float): Tolerance on |Q+ nu.nu - Q- nu.nu| for the bisector condition

    Returns:
        value (float): The density, possibly INFINITE
    """
    check_alpha(alpha)
    if tol < 0:
        raise InvalidArgumentException("tol must be nonnegative")
    dist = t.distance
    if dist < ZERO_JUMP_TOL:
        return 0.0
    if abs(t.normal_jump) <= tol:
        return dist ** alpha
    return INFINITE


def phi(t: JumpTriple, alpha: float) -> float:
    """Envelope density |dQ|^alpha (1 + sqrt(2) |Q+ nu.nu - Q- nu.nu| / |dQ|)^(1/2)"""
    check_alpha(alpha)
    dist = t.distance
    if dist < ZERO_JUMP_TOL:
        return 0.0
    return dist ** alpha * math.sqrt(1 + math.sqrt(2) * abs(t.normal_jump) / dist)


def density(t: JumpTriple, alpha: float, kind: DensityKind, tol: float = BISECTOR_TOL):
    if kind is DensityKind.SINGULAR:
        return zeta(t, alpha, tol)
    return phi(t, alpha)


def phi_angular(
    beta_plus: ArrayOrFloat, beta_minus: ArrayOrFloat, gamma: ArrayOrFloat, alpha: float
) -> ArrayOrFloat:
    """Envelope density in terms of the director and normal angles

    Both printed forms, (1 + |sin x|)^(1/2) and |cos(x/2)| + |sin(x/2)| with
    x = beta+ + beta- - 2 gamma, are evaluated and must coincide. Angles are used
    as given; the expression is 2 pi periodic in every slot.
    """
    check_alpha(alpha)
    amplitude = np.abs(np.sin(np.subtract(beta_plus, beta_minus))) ** alpha
    x = np.add(beta_plus, beta_minus) - 2 * np.asarray(gamma)
    first = amplitude * np.sqrt(1 + np.abs(np.sin(x)))
    second = amplitude * (np.abs(np.cos(x / 2)) + np.abs(np.sin(x / 2)))
    if np.any(np.abs(first - second) > FORM_AGREEMENT_TOL):
        raise ArithmeticError("Angular forms of the envelope density disagree")
    return first if np.ndim(first) > 0 else float(first)


def bisectors(q_plus: QTensor, q_minus: QTensor) -> List[UnitVector]:
    """The four normals gamma_k = (beta+ + beta-)/2 + k pi/2 satisfying Q+ nu.nu = Q- nu.nu

    Raises:
        DegenerateJump: if Q+ = Q-, where every normal satisfies the condition
    """
    if q_distance(q_plus, q_minus) < ZERO_JUMP_TOL:
        raise DegenerateJump("Bisectors are undefined for Q+ = Q-")
    mean = (angle_from_q(q_plus) + angle_from_q(q_minus)) / 2
    return [UnitVector.from_angle(mean + k * np.pi / 2) for k in range(4)]


def is_bisector(t: JumpTriple, tol: float = BISECTOR_TOL) -> bool:
    return abs(t.normal_jump) <= tol
