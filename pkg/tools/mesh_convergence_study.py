"""Tabulate discretization errors of the energy terms on nested meshes

Usage: python tools/mesh_convergence_study.py [--alpha 0.5] [--mu 1] [--out table.csv]
"""

import argparse
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from smawalls.common.util import richardson_ratio
from smawalls.data.io import save_csv
from smawalls.model.discretization import uniform_grid
from smawalls.model.fields import RadialProfile, RectangleConfig, Representation
from smawalls.model.functionals import (
    BoundaryTermForm,
    ModelParams,
    parabola_baseline,
    quarter_elastic,
    quarter_jump_boundary,
    quarter_jump_interior,
    rectangle_jump_energy,
)

MESHES = (51, 101, 201, 401, 801)


def quarter_terms(m: int, params: ModelParams) -> dict:
    theta = uniform_grid(0.0, np.pi / 2, m)
    u = RadialProfile(theta, 0.4 - 0.3 * theta + 0.05 * np.sin(3 * theta), Representation.U)
    return {
        "elastic": quarter_elastic(u, params),
        "interior": quarter_jump_interior(u, params),
        "boundary": quarter_jump_boundary(u, params, BoundaryTermForm()),
    }


def rectangle_error(m: int, params: ModelParams) -> float:
    theta = uniform_grid(0.0, np.pi, m)
    rho = 1.0 / (1.0 + np.sin(theta))
    config = RectangleConfig(L=1.0, H=1.0, profile=RadialProfile(theta, rho, Representation.RHO))
    return rectangle_jump_energy(config, params) - parabola_baseline(1.0, params)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--mu", type=float, default=1.0)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")

    params = ModelParams(mu=args.mu, alpha=args.alpha)
    rows = list()
    for m in tqdm(MESHES, desc="Meshes"):
        row = {"m": m, **quarter_terms(m, params)}
        row["rectangle_error"] = rectangle_error(m, params)
        rows.append(row)
    table = pd.DataFrame(rows)

    # ratios of successive differences, about 4 for second order
    for column in ("elastic", "interior", "boundary"):
        values = table[column].to_numpy()
        table[column + "_ratio"] = [np.nan, np.nan] + [
            richardson_ratio(*values[i - 2 : i + 1]) for i in range(2, len(values))
        ]
    errors = np.abs(table["rectangle_error"].to_numpy())
    table["rectangle_ratio"] = np.concatenate([[np.nan], errors[:-1] / errors[1:]])

    print(table.to_string(index=False))
    if args.out is not None:
        save_csv(args.out, table)
        logging.info("Wrote {}".format(args.out))


if __name__ == "__main__":
    main()
