"""Finite difference stencil and quadrature weights on uniform angular grids"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import sparse

from smawalls.common.config import MIN_GRID_POINTS
from smawalls.common.exceptions import InvalidArgumentException

STENCIL_DESCRIPTION = (
    "quarter: cell slopes (u_(j+1) - u_j) / h at cell midpoints; "
    "rectangle: second-order central differences, second-order one-sided at both ends"
)
QUADRATURE_DESCRIPTION = (
    "quarter: midpoint rule for the jump terms, composite trapezoid rule for the elastic term; "
    "rectangle: composite trapezoid rule"
)


@lru_cache(maxsize=64)
def derivative_matrix(m: int, h: float) -> sparse.csr_matrix:
    """Sparse matrix D such that D @ v equals np.gradient(v, h, edge_order=2)

    Args:
        m (int): Number of grid points
        h (float): Grid spacing

    Returns:
        D (sparse.csr_matrix): The (m, m) differentiation matrix
    """
    if m < MIN_GRID_POINTS:
        raise InvalidArgumentException(
            "The derivative stencil needs at least {:d} points".format(MIN_GRID_POINTS)
        )
    if not h > 0:
        raise InvalidArgumentException("Grid spacing must be positive")

    inner = np.arange(1, m - 1)
    rows = np.concatenate([inner, inner, [0, 0, 0], [m - 1, m - 1, m - 1]])
    cols = np.concatenate(
        [inner - 1, inner + 1, [0, 1, 2], [m - 3, m - 2, m - 1]]
    )
    vals = np.concatenate(
        [
            np.full(m - 2, -1.0),
            np.full(m - 2, 1.0),
            [-3.0, 4.0, -1.0],
            [1.0, -4.0, 3.0],
        ]
    ) / (2 * h)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))


@lru_cache(maxsize=64)
def trapezoid_weights(m: int, h: float) -> np.ndarray:
    w = np.full(m, h)
    w[0] = w[-1] = h / 2
    w.setflags(write=False)
    return w


def uniform_grid(lo: float, hi: float, m: int) -> np.ndarray:
    if m < MIN_GRID_POINTS:
        raise InvalidArgumentException(
            "A grid needs at least {:d} points, got {:d}".format(MIN_GRID_POINTS, m)
        )
    return np.linspace(lo, hi, m)


@lru_cache(maxsize=64)
def midpoint_matrices(m: int, h: float) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Cell averages and cell slopes of nodal values

    Args:
        m (int): Number of grid points
        h (float): Grid spacing

    Returns:
        A (sparse.csr_matrix): (m - 1, m) matrix with (A @ v)_j = (v_j + v_(j+1)) / 2
        B (sparse.csr_matrix): (m - 1, m) matrix with (B @ v)_j = (v_(j+1) - v_j) / h
    """
    if m < MIN_GRID_POINTS:
        raise InvalidArgumentException(
            "Cell stencils need at least {:d} points".format(MIN_GRID_POINTS)
        )
    if not h > 0:
        raise InvalidArgumentException("Grid spacing must be positive")

    cells = np.arange(m - 1)
    rows = np.concatenate([cells, cells])
    cols = np.concatenate([cells, cells + 1])
    A = sparse.csr_matrix((np.full(2 * (m - 1), 0.5), (rows, cols)), shape=(m - 1, m))
    slopes = np.concatenate([np.full(m - 1, -1.0), np.full(m - 1, 1.0)]) / h
    B = sparse.csr_matrix((slopes, (rows, cols)), shape=(m - 1, m))
    return A, B


def cell_midpoints(lo: float, hi: float, m: int) -> np.ndarray:
    """Midpoints of the m - 1 cells of the uniform grid on [lo, hi]"""
    nodes = uniform_grid(lo, hi, m)
    return (nodes[:-1] + nodes[1:]) / 2
