"""Numerical probing of BV-ellipticity with finite families of competitors

Competitors are built in a reference frame in which the interface normal is
e2 and the unit square C is [-1/2, 1/2]^2, surrounded by the collar C' with the
two-valued boundary datum (Q+ above, Q- below). The physical frame is reached by
rotating with gamma - pi/2. Only the jump set inside the closed square C is
charged, including jumps across the sides of C against the collar.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from shapely.geometry import Polygon, box
from tqdm.auto import tqdm

from smawalls.common.base import _Base
from smawalls.common.config import BISECTOR_TOL, PROBE_MARGIN, PROBE_UNDERCUT_TOL, ZERO_JUMP_TOL
from smawalls.common.exceptions import DegenerateJump, InvalidArgumentException
from smawalls.common.types import Point2
from smawalls.model.fields import (
    InterfaceSegment,
    PiecewiseConstantConfig,
    banded_partition,
    sawtooth,
)
from smawalls.model.functionals import ModelParams, partition_energy
from smawalls.model.jump_energy import INFINITE, DensityKind, JumpTriple, bisectors, density
from smawalls.model.qtensor import QTensor, UnitVector, q_distance, q_from_angle

_HALF = 0.5


@dataclass(frozen=True, eq=False)
class ProbeSetup(_Base):
    q_plus: QTensor
    q_minus: QTensor
    nu: UnitVector
    margin: float = PROBE_MARGIN

    def __post_init__(self):
        self.q_plus.check()
        self.q_minus.check()
        if abs(math.hypot(self.nu.x, self.nu.y) - 1) > 1e-12:
            raise InvalidArgumentException("nu must be a unit vector")
        if not self.margin > 0:
            raise InvalidArgumentException("The collar margin must be positive")

    @classmethod
    def from_angles(
        cls, beta_plus: float, beta_minus: float, gamma: float, margin: float = PROBE_MARGIN
    ) -> "ProbeSetup":
        return cls(
            q_from_angle(beta_plus), q_from_angle(beta_minus), UnitVector.from_angle(gamma), margin
        )

    @property
    def rotation(self) -> float:
        """Angle from the reference frame (nu = e2) to the physical frame"""
        return self.nu.gamma - np.pi / 2

    @property
    def square(self) -> Polygon:
        return box(-_HALF, -_HALF, _HALF, _HALF)

    @property
    def collar(self) -> Polygon:
        outer = _HALF + self.margin
        return box(-outer, -outer, outer, outer)

    @property
    def triple(self) -> JumpTriple:
        return JumpTriple(self.q_plus, self.q_minus, self.nu)


def _collar_value(setup: ProbeSetup, y: float) -> QTensor:
    return setup.q_plus if y > 0 else setup.q_minus


def _side_interfaces(
    setup: ProbeSetup, polylines: Sequence[Sequence[Point2]], values: Sequence[QTensor]
) -> List[InterfaceSegment]:
    """Jumps across the sides x = +-1/2 of C between the competitor and the collar

    The normal points out of C, so the collar value is Q+.
    """
    segments = []
    for side, index in ((_HALF, -1), (-_HALF, 0)):
        ends = [line[index][1] for line in polylines]
        cuts = sorted(set([-_HALF, 0.0, _HALF] + ends))
        nu = UnitVector(1.0 if side > 0 else -1.0, 0.0).rotated(setup.rotation)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo <= 0:
                continue
            mid = (lo + hi) / 2
            inside = values[sum(1 for e in ends if e < mid)]
            outside = _collar_value(setup, mid)
            if q_distance(inside, outside) < ZERO_JUMP_TOL:
                continue
            segments.append(InterfaceSegment((side, lo), (side, hi), outside, inside, nu))
    return segments


def _collar_regions(setup: ProbeSetup) -> List[Tuple[Polygon, QTensor]]:
    outer = _HALF + setup.margin
    square = setup.square
    upper = box(-outer, 0.0, outer, outer).difference(square)
    lower = box(-outer, -outer, outer, 0.0).difference(square)
    return [(upper, setup.q_plus), (lower, setup.q_minus)]


def _collar_interfaces(setup: ProbeSetup) -> List[InterfaceSegment]:
    outer = _HALF + setup.margin
    if q_distance(setup.q_plus, setup.q_minus) < ZERO_JUMP_TOL:
        return []
    return [
        InterfaceSegment((-outer, 0.0), (-_HALF, 0.0), setup.q_plus, setup.q_minus, setup.nu),
        InterfaceSegment((_HALF, 0.0), (outer, 0.0), setup.q_plus, setup.q_minus, setup.nu),
    ]


def build_competitor(
    setup: ProbeSetup, polylines: Sequence[Sequence[Point2]], values: Sequence[QTensor]
) -> PiecewiseConstantConfig:
    """Banded competitor on C completed by the boundary datum on the collar

    Args:
        setup (ProbeSetup): Boundary datum and normal
        polylines: Interfaces across C from x = -1/2 to x = 1/2 (reference frame), bottom to top
        values: Band values, bottom first; the first must be Q- and the last Q+

    Returns:
        config (PiecewiseConstantConfig): Partition of C' in the reference frame
    """
    inner = banded_partition((-_HALF, -_HALF, _HALF, _HALF), polylines, values, setup.rotation)
    return PiecewiseConstantConfig(
        inner.regions + _collar_regions(setup),
        inner.interfaces + _side_interfaces(setup, polylines, values) + _collar_interfaces(setup),
        setup.rotation,
    )


def bisector_sawtooth(
    q_above: QTensor,
    q_below: QTensor,
    rotation: float,
    y0: float,
    n_teeth: int,
    downward: bool = False,
) -> Optional[List[Point2]]:
    """Polyline across C whose segment normals are the upward bisectors of the pair

    Each tooth rises along one bisector segment and falls back along the other,
    so the polyline stays above y0 (below y0 if `downward`). Returns None when the
    pair has no such tooth (equal tensors, or the flat interface already bisects).
    """
    try:
        normals = bisectors(q_above, q_below)
    except DegenerateJump:
        return None
    angles = sorted(
        a
        for a in (math.remainder(n.gamma - rotation, 2 * np.pi) for n in normals)
        if 1e-9 < a < np.pi - 1e-9
    )
    if len(angles) != 2:
        return None
    # tangent (sin a, -cos a) rises for a > pi/2; the rising segment comes first
    order = (angles[0], angles[1]) if downward else (angles[1], angles[0])
    points = [(-_HALF, y0)]
    x, y = -_HALF, y0
    for k in range(n_teeth):
        for a in order:
            length = math.sin(a) / n_teeth
            x += length * math.sin(a)
            y -= length * math.cos(a)
            points.append((x, y))
        points[-1] = (-_HALF + (k + 1) / n_teeth, y0)
        x, y = points[-1]
    return points


class Competitor:
    name = "competitor"

    def build(self, setup: ProbeSetup) -> Optional[PiecewiseConstantConfig]:
        """Partition of C', or None if the competitor is not representable for this setup"""
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


class Flat(Competitor):
    name = "flat"

    def build(self, setup: ProbeSetup) -> PiecewiseConstantConfig:
        return build_competitor(setup, [[(-_HALF, 0.0), (_HALF, 0.0)]], [setup.q_minus, setup.q_plus])


@dataclass(frozen=True)
class ZigZag(Competitor):
    """Sawtooth with segments inclined by +-angle to the flat interface"""

    angle: float
    n_teeth: int
    name = "zigzag"

    def build(self, setup: ProbeSetup) -> Optional[PiecewiseConstantConfig]:
        height = math.tan(self.angle) / (2 * self.n_teeth)
        if height > _HALF:
            return None
        line = sawtooth(-_HALF, _HALF, 0.0, self.n_teeth, height)
        return build_competitor(setup, [line], [setup.q_minus, setup.q_plus])

    def describe(self) -> str:
        return "zigzag(angle={:g}deg, n={:d})".format(math.degrees(self.angle), self.n_teeth)


@dataclass(frozen=True)
class BisectorZigZag(Competitor):
    """Sawtooth whose segment normals are exactly the bisectors of (Q+, Q-)"""

    n_teeth: int
    name = "bisector_zigzag"

    def build(self, setup: ProbeSetup) -> Optional[PiecewiseConstantConfig]:
        line = bisector_sawtooth(setup.q_plus, setup.q_minus, setup.rotation, 0.0, self.n_teeth)
        if line is None:
            return None
        return build_competitor(setup, [line], [setup.q_minus, setup.q_plus])

    def describe(self) -> str:
        return "bisector_zigzag(n={:d})".format(self.n_teeth)


@dataclass(frozen=True)
class Laminate(Competitor):
    """Layer of an intermediate value between y = -width/2 and y = width/2

    With n_teeth > 0 both sub-interfaces are bisector sawtooths where the pair
    admits one, flat otherwise.
    """

    beta_mid: float
    width: float
    n_teeth: int = 0
    name = "laminate"

    def __post_init__(self):
        if not 0 < self.width < 1:
            raise InvalidArgumentException("Laminate width must lie in (0, 1)")

    def build(self, setup: ProbeSetup) -> PiecewiseConstantConfig:
        q_mid = q_from_angle(self.beta_mid)
        pairs = (
            (q_mid, setup.q_minus, -self.width / 2, True),
            (setup.q_plus, q_mid, self.width / 2, False),
        )
        lines = []
        for above, below, y0, downward in pairs:
            line = None
            if self.n_teeth > 0:
                line = bisector_sawtooth(
                    above, below, setup.rotation, y0, self.n_teeth, downward
                )
            lines.append(line if line is not None else [(-_HALF, y0), (_HALF, y0)])
        return build_competitor(setup, lines, [setup.q_minus, q_mid, setup.q_plus])

    def describe(self) -> str:
        return "laminate(beta_mid={:g}deg, width={:g}, n={:d})".format(
            math.degrees(self.beta_mid), self.width, self.n_teeth
        )


def default_families() -> List[Competitor]:
    families = [Flat()]
    families += [
        ZigZag(math.radians(angle), n) for angle in range(15, 76, 15) for n in range(1, 9)
    ]
    families += [BisectorZigZag(n) for n in range(1, 9)]
    families += [
        Laminate(k * np.pi / 8, width, n)
        for k in range(8)
        for width in (0.1, 0.25, 0.5)
        for n in (0, 4)
    ]
    return families


def probe_grid() -> List[ProbeSetup]:
    """Twelve setups: beta- = 0, beta+ in {30, 60, 90} deg, gamma in {0, 22.5, 45, 67.5} deg"""
    return [
        ProbeSetup.from_angles(math.radians(delta), 0.0, math.radians(gamma))
        for delta in (30.0, 60.0, 90.0)
        for gamma in (0.0, 22.5, 45.0, 67.5)
    ]


class Verdict(Enum):
    FLAT_OPTIMAL_WITHIN_FAMILY = "flat_optimal_within_family"
    BEATEN = "beaten"


@dataclass
class ProbeReport:
    flat_energy: float
    best_energy: float
    best_competitor: str
    verdict: Verdict
    energies: Dict[str, float]
    kind: DensityKind

    @property
    def beaten_by(self) -> Optional[str]:
        return self.best_competitor if self.verdict is Verdict.BEATEN else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "flat_energy": self.flat_energy,
            "best_energy": self.best_energy,
            "best_competitor": self.best_competitor,
            "verdict": self.verdict.value,
            "beaten_by": self.beaten_by,
            "energies": dict(self.energies),
        }


def competitor_energy(
    setup: ProbeSetup,
    config: PiecewiseConstantConfig,
    params: ModelParams,
    kind: DensityKind,
    tol: float = BISECTOR_TOL,
) -> float:
    return partition_energy(config, params, kind, tol, window=setup.square)


def probe(
    setup: ProbeSetup,
    families: Optional[Sequence[Competitor]] = None,
    params: ModelParams = ModelParams(),
    kind: DensityKind = DensityKind.ENVELOPE,
    tol: float = BISECTOR_TOL,
    progress: bool = False,
) -> ProbeReport:
    """Compare a family of competitors with the flat interface on the unit square

    Args:
        setup (ProbeSetup): Boundary datum (Q+, Q-) and normal nu
        families (Sequence[Competitor]): Competitors to evaluate, `default_families()` if None
        params (ModelParams): mu and alpha of the density
        kind (DensityKind): Singular or envelope density
        tol (float): Bisector tolerance of the singular density
        progress (bool): Show a progress bar

    Returns:
        report (ProbeReport): Flat energy, the cheapest competitor and the verdict. A
            verdict in favour of the flat interface only holds within the family.
    """
    families = default_families() if families is None else families
    flat = params.mu * density(setup.triple, params.alpha, kind, tol)

    energies = {}
    for competitor in tqdm(families, disable=not progress, desc="Competitors"):
        config = competitor.build(setup)
        if config is None:
            logging.debug("Skipping {}: not representable".format(competitor.describe()))
            continue
        energies[competitor.describe()] = competitor_energy(setup, config, params, kind, tol)

    if energies:
        best_name = min(energies, key=lambda k: energies[k])
        best = energies[best_name]
    else:
        best_name, best = "flat", flat

    beaten = best < flat - PROBE_UNDERCUT_TOL if flat != INFINITE else best < INFINITE
    verdict = Verdict.BEATEN if beaten else Verdict.FLAT_OPTIMAL_WITHIN_FAMILY
    if beaten:
        logging.info("Flat interface beaten by {} ({:.6g} < {:.6g})".format(best_name, best, flat))
    return ProbeReport(flat, best, best_name, verdict, energies, kind)
