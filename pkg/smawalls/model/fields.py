"""Restricted classes of configurations: polar jump curves and piecewise constant partitions"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from shapely import affinity
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import unary_union

from smawalls.common.base import _Base
from smawalls.common.config import (
    GRID_UNIFORMITY_TOL,
    MIN_GRID_POINTS,
    ON_CURVE_TOL,
    PARTITION_AREA_TOL,
    ZERO_JUMP_TOL,
)
from smawalls.common.exceptions import InvalidArgumentException, OnJumpSet
from smawalls.common.types import ArrayOrFloat, Point2
from smawalls.common.util import cos_exact, wrap_angle

from .discretization import derivative_matrix, uniform_grid
from .jump_energy import JumpTriple, is_bisector
from .qtensor import QTensor, SampledField, UnitVector, canonical_angle, q_distance


class Representation(Enum):
    RHO = "rho"
    U = "u"  # rho = exp(-u)


@dataclass(frozen=True, eq=False)
class RadialProfile(_Base):
    """Polar jump curve r = rho(theta) sampled on a uniform grid

    Values are either rho itself or u = -log(rho), depending on `representation`.
    """

    theta: np.ndarray
    values: np.ndarray
    representation: Representation = Representation.RHO

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if theta.ndim != 1 or values.shape != theta.shape:
            raise InvalidArgumentException(
                "Profile grid and values must be 1D arrays of equal length"
            )
        if theta.size < MIN_GRID_POINTS:
            raise InvalidArgumentException(
                "A profile needs at least {:d} grid points".format(MIN_GRID_POINTS)
            )
        steps = np.diff(theta)
        if np.any(steps <= 0):
            raise InvalidArgumentException("Profile grid must be strictly increasing")
        if np.max(np.abs(steps - (theta[-1] - theta[0]) / (theta.size - 1))) > GRID_UNIFORMITY_TOL:
            raise InvalidArgumentException("Profile grid must be uniform")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentException("Profile values must be finite")
        if self.representation is Representation.RHO and np.any(values <= 0):
            raise InvalidArgumentException("rho must be strictly positive")

        theta.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        lo: float,
        hi: float,
        m: int,
        representation: Representation = Representation.RHO,
    ) -> "RadialProfile":
        theta = uniform_grid(lo, hi, m)
        return cls(theta, fn(theta), representation)

    @property
    def m(self) -> int:
        return self.theta.size

    @property
    def lo(self) -> float:
        return float(self.theta[0])

    @property
    def hi(self) -> float:
        return float(self.theta[-1])

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def rho(self) -> np.ndarray:
        if self.representation is Representation.RHO:
            return self.values
        return np.exp(-self.values)

    @property
    def u(self) -> np.ndarray:
        if self.representation is Representation.U:
            return self.values
        return -np.log(self.values)

    def derivative(self) -> np.ndarray:
        """Stencil derivative of the stored values"""
        return derivative_matrix(self.m, self.h) @ self.values

    def rho_derivative(self) -> np.ndarray:
        """rho' from the stencil applied to the stored variable (chain rule for u)"""
        if self.representation is Representation.RHO:
            return self.derivative()
        return -self.rho * self.derivative()

    def at(self, theta: ArrayOrFloat) -> ArrayOrFloat:
        """rho off the grid by linear interpolation"""
        return np.interp(theta, self.theta, self.rho)

    def to(self, representation: Representation) -> "RadialProfile":
        if representation is self.representation:
            return self
        values = self.rho if representation is Representation.RHO else self.u
        return RadialProfile(self.theta, values, representation)

    def resample(self, m: int) -> "RadialProfile":
        """Linear interpolation of the stored values onto a uniform grid of m points"""
        theta = uniform_grid(self.lo, self.hi, m)
        return self.from_self(theta=theta, values=np.interp(theta, self.theta, self.values))

    def cartesian(self) -> Tuple[np.ndarray, np.ndarray]:
        rho = self.rho
        return rho * cos_exact(self.theta), rho * np.sin(self.theta)


def _check_span(profile: RadialProfile, lo: float, hi: float, what: str) -> None:
    if abs(profile.lo - lo) > GRID_UNIFORMITY_TOL or abs(profile.hi - hi) > GRID_UNIFORMITY_TOL:
        raise InvalidArgumentException(
            "{} profiles must span [{:.6f}, {:.6f}], got [{:.6f}, {:.6f}]".format(
                what, lo, hi, profile.lo, profile.hi
            )
        )


@dataclass(frozen=True, eq=False)
class RectangleConfig(_Base):
    """Half-width L, height H; circular layers below the curve, horizontal layers above"""

    L: float
    H: float
    profile: RadialProfile

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidArgumentException("L must be positive")
        if not self.H > self.L / 2:
            raise InvalidArgumentException("H must exceed L/2")
        _check_span(self.profile, 0.0, np.pi, "Rectangle")
        rho = self.profile.rho
        if abs(rho[0] - self.L) > ON_CURVE_TOL * self.L or abs(rho[-1] - self.L) > ON_CURVE_TOL * self.L:
            raise InvalidArgumentException("Rectangle profiles must satisfy rho(0) = rho(pi) = L")

    def director_sides(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Director angles (inside, outside) the curve along the rays theta"""
        return theta, np.full_like(theta, np.pi / 2)


@dataclass(frozen=True, eq=False)
class QuarterConfig(_Base):
    """Quarter disk of unit radius; horizontal layers inside the curve, circular outside"""

    profile: RadialProfile

    def __post_init__(self):
        _check_span(self.profile, 0.0, np.pi / 2, "Quarter")

    @property
    def admissible(self) -> bool:
        """The curve stays inside the unit quarter disk"""
        return bool(np.all(self.profile.rho < 1.0))

    def director_sides(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.full_like(theta, np.pi / 2), theta


PolarConfig = Union[RectangleConfig, QuarterConfig]


def _polar_sides(config: PolarConfig, X: np.ndarray, Y: np.ndarray):
    r = np.hypot(X, Y)
    theta = np.arctan2(Y, X)
    lo, hi = config.profile.lo, config.profile.hi
    if np.any(theta < lo - ON_CURVE_TOL) or np.any(theta > hi + ON_CURVE_TOL):
        raise InvalidArgumentException("Points must lie within the angular span of the profile")
    theta = np.clip(theta, lo, hi)
    return theta, r - config.profile.at(theta)


def director_angles(config: PolarConfig, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Vectorized director angle; points exactly on the curve get the outside value"""
    theta, signed = _polar_sides(config, np.asarray(X, float), np.asarray(Y, float))
    inside, outside = config.director_sides(theta)
    return canonical_angle(np.where(signed < 0, inside, outside))


def eval_director(config: PolarConfig, point: Point2) -> float:
    """Director angle at a point of the domain, off the jump curve

    Args:
        config (PolarConfig): Rectangle or quarter configuration
        point (Point2): Cartesian point (x1, x2)

    Returns:
        beta (float): The director angle in [0, pi)
    """
    X, Y = np.array([point[0]], float), np.array([point[1]], float)
    _, signed = _polar_sides(config, X, Y)
    if abs(signed[0]) <= ON_CURVE_TOL:
        raise OnJumpSet(
            "Point {} lies on the jump curve; request a directional limit instead".format(point)
        )
    return float(director_angles(config, X, Y)[0])


def sample_director_field(config: PolarConfig, x: np.ndarray, y: np.ndarray) -> SampledField:
    """Sample a configuration on a lattice and mark the cells crossed by its curve"""
    X, Y = np.meshgrid(x, y)
    _, signed = _polar_sides(config, X, Y)
    s = np.sign(signed)
    corner = s[:-1, :-1]
    mask = (
        (corner != s[:-1, 1:]) | (corner != s[1:, :-1]) | (corner != s[1:, 1:]) | (corner == 0)
    )
    return SampledField.from_angles(x, y, director_angles(config, X, Y), mask)


class CurveGeometry(NamedTuple):
    point: np.ndarray  # (..., 2)
    tangent_angle: ArrayOrFloat
    gamma: ArrayOrFloat  # outward normal angle in [0, 2 pi)
    arclength_density: ArrayOrFloat


def curve_geometry(
    profile: RadialProfile, theta: ArrayOrFloat, slope: Optional[np.ndarray] = None
) -> CurveGeometry:
    """Point, tangent, outward normal and arclength density of the polar curve

    Args:
        profile (RadialProfile): The curve
        theta (ArrayOrFloat): Angles within the grid span
        slope (np.ndarray): Exact rho' on the profile grid; the stencil derivative is used if omitted

    Returns:
        geometry (CurveGeometry): Geometry at the requested angles
    """
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta < profile.lo - GRID_UNIFORMITY_TOL) or np.any(
        theta > profile.hi + GRID_UNIFORMITY_TOL
    ):
        raise InvalidArgumentException("theta outside the profile grid")
    drho_grid = profile.rho_derivative() if slope is None else np.asarray(slope, float)
    return polar_geometry(theta, profile.at(theta), np.interp(theta, profile.theta, drho_grid))


def polar_geometry(theta: ArrayOrFloat, rho: ArrayOrFloat, drho: ArrayOrFloat) -> CurveGeometry:
    """Geometry of r = rho(theta) from the values of rho and rho' at the angles theta"""
    theta = np.asarray(theta, dtype=np.float64)
    c, s = cos_exact(theta), np.sin(theta)
    tx = drho * c - rho * s
    ty = drho * s + rho * c
    point = np.stack([rho * c, rho * s], axis=-1)
    return CurveGeometry(
        point,
        np.arctan2(ty, tx),
        wrap_angle(np.arctan2(-tx, ty)),
        np.hypot(rho, drho),
    )


def parabola_rho(theta: ArrayOrFloat, L: float = 1.0) -> ArrayOrFloat:
    return L / (1 + np.sin(theta))


def parabola_profile(
    L: float, m: int, representation: Representation = Representation.RHO
) -> RadialProfile:
    """The closed-form rectangle minimizer rho = L / (1 + sin theta) on [0, pi]"""
    profile = RadialProfile.from_function(lambda t: parabola_rho(t, L), 0.0, np.pi, m)
    return profile.to(representation)


def parabola_cartesian_residual(profile: RadialProfile, L: float) -> float:
    """Largest deviation from x2 = L/2 - x1^2 / (2L) over the grid"""
    x1, x2 = profile.cartesian()
    return float(np.max(np.abs(x2 - (L / 2 - x1 ** 2 / (2 * L)))))


def two_arc_rho(theta: ArrayOrFloat, a: float, b: float) -> ArrayOrFloat:
    """Polar form min(a / (1 - sin), b / (1 + sin)) of the two parabolic arcs"""
    s = np.sin(theta)
    with np.errstate(divide="ignore"):
        first = np.where(s < 1, a / np.maximum(1 - s, 0.0), np.inf)
    return np.minimum(first, b / (1 + s))


def parabolic_arc_x1(x2: ArrayOrFloat, a: float, b: float) -> ArrayOrFloat:
    """x1 = min((a^2 + 2 a x2)^(1/2), (b^2 - 2 b x2)^(1/2))"""
    x2 = np.asarray(x2, dtype=np.float64)
    return np.minimum(
        np.sqrt(np.clip(a ** 2 + 2 * a * x2, 0.0, None)),
        np.sqrt(np.clip(b ** 2 - 2 * b * x2, 0.0, None)),
    )


class ArcFit(NamedTuple):
    a: float
    b: float
    max_deviation: float


def fit_parabolic_arcs(profile: RadialProfile) -> ArcFit:
    """Match the two parabolic arcs to the boundary values of a quarter profile

    a = rho(0) and b = 2 rho(pi/2); the deviation is measured in x1 at equal x2.
    """
    _check_span(profile, 0.0, np.pi / 2, "Quarter")
    rho = profile.rho
    a, b = float(rho[0]), float(2 * rho[-1])
    x1, x2 = profile.cartesian()
    deviation = np.max(np.abs(x1 - parabolic_arc_x1(x2, a, b)))
    return ArcFit(a, b, float(deviation))


@dataclass(frozen=True, eq=False)
class InterfaceSegment:
    """Straight piece of a jump set; nu points into the Q+ side"""

    start: Point2
    end: Point2
    q_plus: QTensor
    q_minus: QTensor
    nu: UnitVector

    @property
    def line(self) -> LineString:
        return LineString([self.start, self.end])

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    @property
    def triple(self) -> JumpTriple:
        return JumpTriple(self.q_plus, self.q_minus, self.nu)


@dataclass(frozen=True, eq=False)
class PiecewiseConstantConfig:
    """Finite partition into polygons with constant Q-tensors

    Geometry is stored in a frame rotated by -rotation with respect to the
    physical frame, tensors and normals are physical.
    """

    regions: List[Tuple[Polygon, QTensor]]
    interfaces: List[InterfaceSegment]
    rotation: float = 0.0
    bisecting: Optional[bool] = None

    @property
    def domain(self) -> Polygon:
        return unary_union([p for p, _ in self.regions])

    @property
    def interface_length(self) -> float:
        return float(sum(seg.length for seg in self.interfaces))

    def physical_regions(self) -> List[Tuple[Polygon, QTensor]]:
        return [
            (affinity.rotate(p, self.rotation, origin=(0, 0), use_radians=True), q)
            for p, q in self.regions
        ]

    def rotated(self, delta: float) -> "PiecewiseConstantConfig":
        """The same partition with directors, normals and geometry rotated by delta"""
        return PiecewiseConstantConfig(
            [(p, q.rotated(delta)) for p, q in self.regions],
            [
                InterfaceSegment(
                    seg.start,
                    seg.end,
                    seg.q_plus.rotated(delta),
                    seg.q_minus.rotated(delta),
                    seg.nu.rotated(delta),
                )
                for seg in self.interfaces
            ],
            self.rotation + delta,
            self.bisecting,
        )

    def region_value(self, point: Point2) -> Optional[QTensor]:
        p = Point(point)
        for poly, q in self.regions:
            if poly.contains(p):
                return q
        return None

    def validate(self, tol: float = PARTITION_AREA_TOL) -> None:
        """Check that the regions tile the domain and every normal points into its Q+ region"""
        for poly, _ in self.regions:
            if not poly.is_valid or poly.area <= 0:
                raise InvalidArgumentException("Partition contains an invalid region")
        if sum(p.area for p, _ in self.regions) - self.domain.area > tol:
            raise InvalidArgumentException("Partition regions overlap")

        probe = 1e3 * tol
        for seg in self.interfaces:
            if seg.length <= tol:
                continue
            normal = seg.nu.rotated(-self.rotation).vector
            mid = (np.asarray(seg.start) + np.asarray(seg.end)) / 2
            for side, expected in ((1, seg.q_plus), (-1, seg.q_minus)):
                found = self.region_value(tuple(mid + side * probe * normal))
                if found is None or q_distance(found, expected) > ZERO_JUMP_TOL:
                    raise InvalidArgumentException(
                        "Interface normal at {} is inconsistent with the adjacent regions".format(
                            tuple(mid)
                        )
                    )


def banded_partition(
    box: Tuple[float, float, float, float],
    polylines: Sequence[Sequence[Point2]],
    values: Sequence[QTensor],
    rotation: float = 0.0,
) -> PiecewiseConstantConfig:
    """Partition a box into bands separated by x-monotone polylines

    Args:
        box: (xmin, ymin, xmax, ymax) in the geometry frame
        polylines: Interfaces from x = xmin to x = xmax, ordered bottom to top, not crossing
        values: One tensor per band, bottom band first (len(polylines) + 1 entries)
        rotation (float): Angle from the geometry frame to the physical frame

    Returns:
        config (PiecewiseConstantConfig): Partition whose interface normals point upwards
    """
    if len(values) != len(polylines) + 1:
        raise InvalidArgumentException("Need exactly one value per band")
    xmin, ymin, xmax, ymax = box
    boundaries = (
        [[(xmin, ymin), (xmax, ymin)]]
        + [list(line) for line in polylines]
        + [[(xmin, ymax), (xmax, ymax)]]
    )

    regions = []
    for k, value in enumerate(values):
        ring = boundaries[k] + list(reversed(boundaries[k + 1]))
        regions.append((Polygon(ring), value))

    interfaces = []
    for k, line in enumerate(polylines):
        below, above = values[k], values[k + 1]
        if q_distance(below, above) < ZERO_JUMP_TOL:
            continue
        for a, b in zip(line[:-1], line[1:]):
            tx, ty = b[0] - a[0], b[1] - a[1]
            if np.hypot(tx, ty) == 0:
                continue
            # upward normal in the geometry frame, then to the physical frame
            nu = UnitVector.from_angle(np.arctan2(tx, -ty)).rotated(rotation)
            interfaces.append(InterfaceSegment(tuple(a), tuple(b), above, below, nu))

    return PiecewiseConstantConfig(regions, interfaces, rotation)


def sawtooth(x0: float, x1: float, y0: float, n_teeth: int, height: float) -> List[Point2]:
    """Polyline rising and falling n_teeth times between x0 and x1, starting and ending at y0"""
    if n_teeth == 0:
        return [(x0, y0), (x1, y0)]
    xs = np.linspace(x0, x1, 2 * n_teeth + 1)
    return [(float(x), y0 + (height if k % 2 else 0.0)) for k, x in enumerate(xs)]


def make_zigzag(b: float, n_teeth: int, q_plus: QTensor, q_minus: QTensor) -> PiecewiseConstantConfig:
    """Rectangle [0, b] x [-b, b] split by a 45 degree sawtooth with Q+ above

    Args:
        b (float): Base of the rectangle
        n_teeth (int): Number of teeth; 0 gives the flat horizontal interface
        q_plus (QTensor): Value above the interface
        q_minus (QTensor): Value below the interface

    Returns:
        config (PiecewiseConstantConfig): The partition; `bisecting` tells whether every
            segment normal is a bisector of (Q+, Q-)
    """
    if not b > 0:
        raise InvalidArgumentException("b must be positive")
    if n_teeth < 0:
        raise InvalidArgumentException("n_teeth must be nonnegative")

    height = b / (2 * n_teeth) if n_teeth > 0 else 0.0
    line = sawtooth(0.0, b, 0.0, n_teeth, height)
    config = banded_partition((0.0, -b, b, b), [line], [q_minus, q_plus])
    bisecting = all(is_bisector(seg.triple) for seg in config.interfaces)
    if n_teeth > 0 and not bisecting:
        logging.info("Zig-zag segments are not bisecting for the given director pair")
    return PiecewiseConstantConfig(config.regions, config.interfaces, 0.0, bisecting)
