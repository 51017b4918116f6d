import numpy as np

from .types import ArrayOrFloat


def wrap_angle(angle: ArrayOrFloat, period: float = 2 * np.pi) -> ArrayOrFloat:
    """Map angles to [0, period)"""
    wrapped = np.mod(angle, period)
    # np.mod returns period itself for tiny negative inputs
    wrapped = np.where(wrapped >= period, 0.0, wrapped)
    return wrapped if np.ndim(wrapped) > 0 else float(wrapped)


def cos_exact(theta: ArrayOrFloat) -> ArrayOrFloat:
    """cos(theta) evaluated as sin(pi/2 - theta); exactly zero at theta = pi/2"""
    return np.sin(np.pi / 2 - theta)


def richardson_ratio(coarse: float, medium: float, fine: float) -> float:
    """Ratio of successive differences of a quantity computed on three nested grids"""
    return (coarse - medium) / (medium - fine)
