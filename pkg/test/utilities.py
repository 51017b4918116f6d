import numpy as np

from smawalls.common.util import richardson_ratio
from smawalls.model.fields import RadialProfile, Representation


def assert_equal(value, target, precision=1e-3):
    assert np.all(value > target - precision) and np.all(
        value < target + precision
    ), "got value={}, target={}".format(value, target)


def assert_second_order(values, lo=3.5, hi=4.5):
    """values on three nested grids (coarse, medium, fine)"""
    ratio = richardson_ratio(*values)
    assert lo <= ratio <= hi, "Richardson ratio {:.3f} not in [{}, {}]".format(ratio, lo, hi)


def smooth_u_profile(rng, m: int = 50) -> RadialProfile:
    """u = c + s theta + a sin(k theta + phase) with u' bounded away from the bisecting slopes"""
    c = rng.uniform(0.4, 1.0)
    s = rng.uniform(-0.7, -0.3)
    k = int(rng.integers(1, 4))
    a = rng.uniform(0.0, 0.15 / k)
    phase = rng.uniform(0, 2 * np.pi)
    return RadialProfile.from_function(
        lambda t: c + s * t + a * np.sin(k * t + phase),
        0.0,
        np.pi / 2,
        m,
        Representation.U,
    )


def constant_u_profile(value: float, m: int = 50) -> RadialProfile:
    return RadialProfile.from_function(
        lambda t: np.full_like(t, value), 0.0, np.pi / 2, m, Representation.U
    )


SWEEP_SIZE = 10_000


def angle_sweep(rng, n: int = SWEEP_SIZE, separation: float = 1e-3):
    """Seeded (beta+, beta-, gamma, alpha) samples with |sin(beta+ - beta-)| > separation"""
    bp = rng.uniform(-2 * np.pi, 2 * np.pi, n)
    bm = rng.uniform(-2 * np.pi, 2 * np.pi, n)
    gamma = rng.uniform(-2 * np.pi, 2 * np.pi, n)
    alpha = rng.uniform(0.05, 0.95, n)
    keep = np.abs(np.sin(bp - bm)) > separation
    return bp[keep], bm[keep], gamma[keep], alpha[keep]
