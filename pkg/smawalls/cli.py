"""Command line interface: smawalls {density,rectangle,quarter,zigzag,probe,sweep}"""

import argparse
import logging
import math
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm.auto import tqdm

from smawalls import __version__
from smawalls.analysis.bv_probe import ProbeSetup, default_families, probe, probe_grid
from smawalls.common.config import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DEFAULT_GRAD_TOL,
    DEFAULT_K1,
    DEFAULT_MAX_ITERS,
    DEFAULT_MU,
    NEWTON_MAX_ITERS,
)
from smawalls.common.exceptions import InvalidArgumentException, MisconfigurationException
from smawalls.data.exceptions import MalformedConfigException, MalformedProfileException
from smawalls.data.io import read_config_file, read_profile, save_csv, save_json
from smawalls.model.discretization import QUADRATURE_DESCRIPTION, STENCIL_DESCRIPTION
from smawalls.model.fields import Representation, make_zigzag, parabola_rho, two_arc_rho
from smawalls.model.functionals import (
    BoundaryForm,
    BoundaryTermForm,
    ModelParams,
    WeightFunction,
    half_circle_baseline,
    parabola_baseline,
    partition_energy,
)
from smawalls.model.jump_energy import DensityKind, JumpTriple, phi, zeta
from smawalls.model.qtensor import q_from_angle
from smawalls.solve.optimizer import (
    GradientMode,
    InitialGuess,
    InitKind,
    LineSearch,
    SolverConfig,
)
from smawalls.solve.problems import SolveReport, solve_quarter, solve_rectangle

EXIT_OK = 0
EXIT_NOT_CONVERGED = 3


def _float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers, got {}".format(value))


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers, got {}".format(value))


def _common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--out", type=Path, default=None, help="Output directory")
    parser.add_argument("--config", type=Path, default=None, help="Flat key = value file")
    parser.add_argument("--log-level", type=str, default="INFO")
    return parser


def _model_options(with_K1: bool = True) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    if with_K1:
        parser.add_argument("--K1", type=float, default=DEFAULT_K1)
    parser.add_argument("--mu", type=float, default=DEFAULT_MU)
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    return parser


def _solver_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--m-start", type=int, default=50)
    parser.add_argument("--m-end", type=int, default=100)
    parser.add_argument("--m-step", type=int, default=10)
    parser.add_argument("--grad-tol", type=float, default=DEFAULT_GRAD_TOL)
    parser.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    parser.add_argument(
        "--newton-iters", type=int, default=NEWTON_MAX_ITERS, help="Newton polish after BFGS, 0 disables"
    )
    parser.add_argument(
        "--smoothing", type=_float_list, default=None, help="Regularization warm start levels"
    )
    parser.add_argument(
        "--init", type=str, default="constant", choices=[k.value for k in InitKind]
    )
    parser.add_argument("--init-file", type=Path, default=None)
    parser.add_argument("--init-value", type=float, default=None)
    parser.add_argument("--amplitude", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--gradient", type=str, default="analytic", choices=[g.value for g in GradientMode]
    )
    parser.add_argument(
        "--line-search", type=str, default="wolfe", choices=[s.value for s in LineSearch]
    )
    return parser


def _boundary_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--boundary-form", type=str, default="integral", choices=[f.value for f in BoundaryForm]
    )
    parser.add_argument("--g", type=str, default="linear", choices=[g.value for g in WeightFunction])
    return parser


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="smawalls",
        description="Jump set energies and minimizers of smectic-A walls",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    density = commands.add_parser(
        "density",
        parents=[_common_options()],
        help="Tabulate both jump densities against the normal angle",
    )
    density.add_argument("--beta-plus", type=float, default=90.0, help="degrees")
    density.add_argument("--beta-minus", type=float, default=0.0, help="degrees")
    density.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    density.add_argument("--points", type=int, default=9)
    density.set_defaults(handler=cmd_density)

    rectangle = commands.add_parser(
        "rectangle",
        parents=[_common_options(), _model_options(False), _solver_options()],
        help="Solve the rectangle problem",
    )
    rectangle.add_argument("--L", type=float, default=1.0)
    rectangle.add_argument("--H", type=float, default=1.0)
    rectangle.add_argument("--m", type=int, default=None, help="Single mesh, overrides the schedule")
    rectangle.add_argument(
        "--representation", type=str, default="rho", choices=[r.value for r in Representation]
    )
    rectangle.set_defaults(handler=cmd_rectangle, m_end=200, m_step=50)

    quarter = commands.add_parser(
        "quarter",
        parents=[_common_options(), _model_options(), _solver_options(), _boundary_options()],
        help="Solve the quarter-circle problem",
    )
    quarter.set_defaults(handler=cmd_quarter)

    zigzag = commands.add_parser(
        "zigzag",
        parents=[_common_options(), _model_options(False)],
        help="Energies of 45 degree zig-zags",
    )
    zigzag.add_argument("--b", type=float, default=1.0)
    zigzag.add_argument("--beta-plus", type=float, default=90.0, help="degrees")
    zigzag.add_argument("--beta-minus", type=float, default=0.0, help="degrees")
    zigzag.add_argument("--teeth", type=_int_list, default="1,4,16,64")
    zigzag.set_defaults(handler=cmd_zigzag)

    probe_parser = commands.add_parser(
        "probe", parents=[_common_options(), _model_options(False)], help="Probe the flat interface"
    )
    probe_parser.add_argument("--beta-plus", type=float, default=90.0, help="degrees")
    probe_parser.add_argument("--beta-minus", type=float, default=0.0, help="degrees")
    probe_parser.add_argument("--gamma", type=float, default=90.0, help="degrees")
    probe_parser.add_argument(
        "--kind", type=str, default="envelope", choices=[k.value for k in DensityKind]
    )
    probe_parser.add_argument("--grid", action="store_true", help="Run the twelve-setup grid")
    probe_parser.set_defaults(handler=cmd_probe)

    sweep = commands.add_parser(
        "sweep",
        parents=[_common_options(), _model_options(), _solver_options(), _boundary_options()],
        help="Quarter solves over mu and alpha",
    )
    sweep.add_argument("--mus", type=_float_list, default="1,2")
    sweep.add_argument("--alphas", type=_float_list, default="0.2,0.5")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(handler=cmd_sweep)

    subparsers = {
        "density": density,
        "rectangle": rectangle,
        "quarter": quarter,
        "zigzag": zigzag,
        "probe": probe_parser,
        "sweep": sweep,
    }
    return parser, subparsers


def _apply_config_file(parser, subparser: argparse.ArgumentParser, path: Path) -> None:
    try:
        values = read_config_file(path)
    except (OSError, MalformedConfigException) as e:
        parser.error(str(e))
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(values) - set(actions))
    if unknown:
        parser.error("unknown config keys in {}: {}".format(path, ", ".join(unknown)))

    for key, value in values.items():
        # flags take no value on the command line
        if actions[key].nargs == 0:
            if value.lower() not in ("true", "false"):
                parser.error('config key "{}" must be true or false'.format(key))
            values[key] = value.lower() == "true"
    subparser.set_defaults(**values)


def _model_params(parser, args) -> ModelParams:
    try:
        return ModelParams(
            K1=getattr(args, "K1", DEFAULT_K1), mu=args.mu, alpha=args.alpha, epsilon=args.epsilon
        )
    except InvalidArgumentException as e:
        parser.error(str(e))


def _solver_config(parser, args) -> SolverConfig:
    try:
        if getattr(args, "m", None) is not None:
            schedule = (args.m,)
        else:
            if args.m_step <= 0:
                raise MisconfigurationException("--m-step must be positive")
            schedule = tuple(range(args.m_start, args.m_end + 1, args.m_step))
        kind = InitKind(args.init)
        profile = None
        if kind is InitKind.EXPLICIT:
            if args.init_file is None:
                raise MisconfigurationException("--init file requires --init-file")
            profile = read_profile(args.init_file)
        guess = InitialGuess(kind, args.init_value, args.seed, args.amplitude, profile)
        options = dict(
            mesh_schedule=schedule,
            grad_tol=args.grad_tol,
            max_iters=args.max_iters,
            newton_iters=args.newton_iters,
            line_search=LineSearch(args.line_search),
            gradient=GradientMode(args.gradient),
            initial_guess=guess,
            representation=Representation(getattr(args, "representation", "rho")),
        )
        if args.smoothing is not None:
            options["epsilon_schedule"] = tuple(args.smoothing)
        return SolverConfig(**options)
    except (
        ValueError,
        MisconfigurationException,
        InvalidArgumentException,
        MalformedProfileException,
    ) as e:
        parser.error(str(e))


def _boundary_form(parser, args) -> BoundaryTermForm:
    try:
        return BoundaryTermForm(BoundaryForm(args.boundary_form), WeightFunction(args.g))
    except ValueError as e:
        parser.error(str(e))


def _metadata(args, **extra) -> Dict[str, Any]:
    config = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in ("handler", "out", "config", "log_level")
    }
    meta = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "stencil": STENCIL_DESCRIPTION,
        "quadrature": QUADRATURE_DESCRIPTION,
        "version": __version__,
    }
    meta.update(extra)
    return meta


def _exit_code(report: SolveReport) -> int:
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_density(parser, args) -> int:
    if args.points < 2:
        parser.error("--points must be at least 2")
    try:
        gammas = np.linspace(0.0, 180.0, args.points)
        triples = [
            JumpTriple.from_angles(
                math.radians(args.beta_plus), math.radians(args.beta_minus), math.radians(g)
            )
            for g in gammas
        ]
        table = pd.DataFrame(
            {
                "gamma": gammas,
                "zeta": [zeta(t, args.alpha) for t in triples],
                "phi": [phi(t, args.alpha) for t in triples],
            }
        )
    except InvalidArgumentException as e:
        parser.error(str(e))
    print(table.to_string(index=False))
    if args.out is not None:
        save_csv(args.out / "density.csv", table)
        save_json(args.out / "metadata.json", _metadata(args))
    return EXIT_OK


def _write_report(out: Path, report: SolveReport, energy: Dict[str, Any], args) -> None:
    save_json(out / "energy.json", energy)
    save_json(out / "report.json", report.to_dict())
    save_json(out / "metadata.json", _metadata(args))


def cmd_rectangle(parser, args) -> int:
    params = _model_params(parser, args)
    cfg = _solver_config(parser, args)
    try:
        report = solve_rectangle(args.L, args.H, params, cfg)
    except InvalidArgumentException as e:
        parser.error(str(e))

    profile = report.profile
    exact = parabola_rho(profile.theta, args.L)
    logging.info(
        "rectangle: max |rho - L/(1 + sin)| = {:.3e}, energy {:.10g}".format(
            report.errors["linf"], report.breakdown.total
        )
    )
    if args.out is not None:
        x1, x2 = profile.cartesian()
        save_csv(
            args.out / "profile.csv",
            {
                "theta": profile.theta,
                "rho_numeric": profile.rho,
                "rho_exact": exact,
                "abs_err": np.abs(profile.rho - exact),
            },
        )
        save_csv(args.out / "curve.csv", {"x1": x1, "x2": x2})
        energy = report.breakdown.to_dict()
        energy["parabola_baseline"] = parabola_baseline(args.L, params)
        energy["half_circle_baseline"] = half_circle_baseline(args.L, params)
        _write_report(args.out, report, energy, args)
    return _exit_code(report)


def write_quarter_outputs(out: Path, report: SolveReport, metadata: Dict[str, Any]) -> None:
    profile = report.profile
    x1, x2 = profile.cartesian()
    arcs = two_arc_rho(profile.theta, report.fit.a, report.fit.b)
    save_csv(out / "profile.csv", {"theta": profile.theta, "rho": profile.rho})
    save_csv(out / "jump_set.csv", {"x1": x1, "x2": x2})
    save_csv(
        out / "arcs.csv",
        {
            "theta": profile.theta,
            "rho": arcs,
            "x1": arcs * np.sin(np.pi / 2 - profile.theta),
            "x2": arcs * np.sin(profile.theta),
        },
    )
    save_json(out / "energy.json", report.breakdown.to_dict())
    save_json(out / "report.json", report.to_dict())
    save_json(out / "metadata.json", metadata)


def cmd_quarter(parser, args) -> int:
    params = _model_params(parser, args)
    cfg = _solver_config(parser, args)
    form = _boundary_form(parser, args)
    try:
        report = solve_quarter(params, cfg, form)
    except InvalidArgumentException as e:
        parser.error(str(e))
    logging.info(
        "quarter: total energy {:.10g}, arc fit deviation {:.3e}, admissible {}".format(
            report.breakdown.total, report.fit.max_deviation, report.admissible
        )
    )
    if args.out is not None:
        write_quarter_outputs(args.out, report, _metadata(args))
    return _exit_code(report)


def cmd_zigzag(parser, args) -> int:
    params = _model_params(parser, args)
    if not args.b > 0 or any(n < 1 for n in args.teeth):
        parser.error("--b must be positive and --teeth positive integers")
    q_plus = q_from_angle(math.radians(args.beta_plus))
    q_minus = q_from_angle(math.radians(args.beta_minus))

    rows = []
    for n in [0] + list(args.teeth):
        config = make_zigzag(args.b, n, q_plus, q_minus)
        rows.append(
            {
                "n_teeth": n,
                "length": config.interface_length,
                "zeta": partition_energy(config, params, DensityKind.SINGULAR),
                "phi": partition_energy(config, params, DensityKind.ENVELOPE),
            }
        )
    table = pd.DataFrame(rows, columns=["n_teeth", "length", "zeta", "phi"])
    print(table.to_string(index=False))
    if args.out is not None:
        save_csv(args.out / "zigzag.csv", table)
        save_json(args.out / "metadata.json", _metadata(args))
    return EXIT_OK


def cmd_probe(parser, args) -> int:
    params = _model_params(parser, args)
    try:
        kind = DensityKind(args.kind)
    except ValueError as e:
        parser.error(str(e))
    if args.grid:
        setups = probe_grid()
    else:
        try:
            setups = [
                ProbeSetup.from_angles(
                    math.radians(args.beta_plus),
                    math.radians(args.beta_minus),
                    math.radians(args.gamma),
                )
            ]
        except InvalidArgumentException as e:
            parser.error(str(e))

    families = default_families()
    results = []
    for setup in setups:
        report = probe(setup, families, params, kind, progress=len(setups) == 1)
        entry = report.to_dict()
        entry["setup"] = {
            "beta_plus": math.degrees(setup.q_plus.angle),
            "beta_minus": math.degrees(setup.q_minus.angle),
            "gamma": math.degrees(setup.nu.gamma),
        }
        results.append(entry)
        logging.info(
            "probe: flat {:.10g}, best {} = {:.10g}, {}".format(
                report.flat_energy, report.best_competitor, report.best_energy, report.verdict.value
            )
        )
    if args.out is not None:
        save_json(args.out / "probe.json", {"results": results})
        save_json(args.out / "metadata.json", _metadata(args))
    return EXIT_OK


def _sweep_run(job) -> Dict[str, Any]:
    params, cfg, form, out, metadata = job
    report = solve_quarter(params, cfg, form)
    if out is not None:
        write_quarter_outputs(out, report, metadata)
    return {
        "mu": params.mu,
        "alpha": params.alpha,
        "converged": report.converged,
        "mean_rho": float(np.mean(report.profile.rho)),
        "fit_deviation": report.fit.max_deviation,
        "total_energy": report.breakdown.total,
        "admissible": report.admissible,
    }


def cmd_sweep(parser, args) -> int:
    base = _model_params(parser, args)
    cfg = _solver_config(parser, args)
    form = _boundary_form(parser, args)
    if args.workers < 1:
        parser.error("--workers must be at least 1")

    jobs = []
    for mu in args.mus:
        for alpha in args.alphas:
            try:
                params = base.from_self(mu=mu, alpha=alpha)
            except InvalidArgumentException as e:
                parser.error(str(e))
            out = None
            if args.out is not None:
                out = args.out / "mu{:g}_alpha{:g}".format(mu, alpha)
            jobs.append((params, cfg, form, out, _metadata(args, mu=mu, alpha=alpha)))

    if args.workers == 1:
        rows = [_sweep_run(job) for job in tqdm(jobs, desc="Sweep")]
    else:
        with Pool(args.workers) as pool:
            rows = list(tqdm(pool.imap(_sweep_run, jobs), total=len(jobs), desc="Sweep"))

    summary = pd.DataFrame(rows)
    print(summary.to_string(index=False))
    if args.out is not None:
        save_csv(args.out / "summary.csv", summary)
        save_json(args.out / "metadata.json", _metadata(args))
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NOT_CONVERGED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        _apply_config_file(parser, subparsers[args.command], args.config)
        args = parser.parse_args(argv)

    logging.basicConfig(
        level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(message)s"
    )
    return args.handler(parser, args)
