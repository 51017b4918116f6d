"""Mesh continuation drivers for the rectangle and quarter-circle problems"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from smawalls.common.config import DEFAULT_GRAD_TOL, DEFAULT_QUARTER_U0
from smawalls.common.exceptions import InvalidArgumentException
from smawalls.model.discretization import trapezoid_weights, uniform_grid
from smawalls.model.fields import (
    ArcFit,
    QuarterConfig,
    RadialProfile,
    RectangleConfig,
    Representation,
    fit_parabolic_arcs,
    parabola_cartesian_residual,
    parabola_rho,
)
from smawalls.model.functionals import (
    BoundaryTermForm,
    EnergyBreakdown,
    ModelParams,
    QuarterObjective,
    RectangleObjective,
    quarter_total,
    rectangle_jump_energy,
)

from .optimizer import (
    Diagnostics,
    Difference,
    FiniteDifferenceObjective,
    GradientMode,
    InitKind,
    SolverConfig,
    Status,
    grad_check,
    minimize_bfgs,
    refine_newton,
)


@dataclass
class StageReport:
    m: int
    epsilon: float
    status: Status
    iterations: int
    grad_norm: float
    energy: float
    fallbacks: int
    n_evaluations: int
    newton_iterations: int = 0

    @property
    def converged(self) -> bool:
        return self.status.converged

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "status": self.status.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "energy": self.energy,
            "fallbacks": self.fallbacks,
            "n_evaluations": self.n_evaluations,
            "newton_iterations": self.newton_iterations,
        }


@dataclass
class SolveReport:
    """Outcome of a continuation run

    `profile` holds rho for the rectangle problem and u for the quarter problem.
    `errors` collects distances to closed forms (rectangle only).
    """

    problem: str
    profile: RadialProfile
    breakdown: EnergyBreakdown
    params: ModelParams
    target_epsilon: float
    stages: List[StageReport] = field(default_factory=list)
    grad_check_initial: float = float("nan")
    grad_check_final: float = float("nan")
    admissible: Optional[bool] = None
    fit: Optional[ArcFit] = None
    errors: Dict[str, float] = field(default_factory=dict)
    settings: Dict[str, Any] = field(default_factory=dict)
    grad_tol: float = DEFAULT_GRAD_TOL

    @property
    def converged(self) -> bool:
        """The last stage ran at the target epsilon and ended with |g|_inf <= grad_tol"""
        if not self.stages or self.stages[-1].epsilon != self.target_epsilon:
            return False
        return bool(self.grad_norm <= self.grad_tol)

    @property
    def iterations(self) -> List[int]:
        return [s.iterations for s in self.stages]

    @property
    def grad_norm(self) -> float:
        return self.stages[-1].grad_norm if self.stages else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "problem": self.problem,
            "converged": self.converged,
            "energy": self.breakdown.to_dict(),
            "params": {
                "K1": self.params.K1,
                "mu": self.params.mu,
                "alpha": self.params.alpha,
                "epsilon": self.params.epsilon,
            },
            "stages": [s.to_dict() for s in self.stages],
            "final_grad_norm": self.grad_norm,
            "grad_check_initial": self.grad_check_initial,
            "grad_check_final": self.grad_check_final,
            "representation": self.profile.representation.value,
            "settings": dict(self.settings),
        }
        if self.admissible is not None:
            result["admissible"] = self.admissible
        if self.fit is not None:
            result["fit"] = self.fit._asdict()
        if self.errors:
            result["errors"] = dict(self.errors)
        return result


def _settings(cfg: SolverConfig) -> Dict[str, Any]:
    return {
        "mesh_schedule": list(cfg.mesh_schedule),
        "epsilon_schedule": list(cfg.epsilon_schedule),
        "grad_tol": cfg.grad_tol,
        "f_tol": cfg.f_tol,
        "max_iters": cfg.max_iters,
        "line_search": cfg.line_search.value,
        "c1": cfg.c1,
        "c2": cfg.c2,
        "gradient": cfg.gradient.value,
        "init": cfg.initial_guess.kind.value,
        "seed": cfg.initial_guess.seed,
        "amplitude": cfg.initial_guess.amplitude,
        "newton_iters": cfg.newton_iters,
    }


def _with_gradient_mode(objective, cfg: SolverConfig):
    if cfg.gradient is GradientMode.FINITE_DIFFERENCE:
        return FiniteDifferenceObjective(lambda x: objective(x)[0])
    return objective


def _refine(objective, x: np.ndarray, cfg: SolverConfig) -> Tuple[np.ndarray, Optional[Diagnostics]]:
    """Newton refinement in corrections to x, for objectives with a banded Hessian"""
    if cfg.newton_iters == 0 or not hasattr(objective, "around"):
        return x, None
    shifted = objective.around(x)
    dx, diag = refine_newton(shifted, np.zeros_like(x), shifted.hessian_bandwidth, cfg)
    return shifted.point(dx), diag


def _continuation(
    problem: str,
    build: Callable[[int, float], Callable],
    start: RadialProfile,
    extract: Callable[[RadialProfile], np.ndarray],
    embed: Callable[[int, np.ndarray], RadialProfile],
    target_epsilon: float,
    cfg: SolverConfig,
) -> Tuple[RadialProfile, List[StageReport], float, float]:
    """Solve on every mesh of the schedule, warm starting from the previous stage

    Each mesh stage runs the smoothing levels above the target epsilon first. A
    stage that BFGS leaves above grad_tol is finished by the Newton refinement.
    """
    profile = start
    stages = []
    check_initial = grad_check(build(start.m, target_epsilon), extract(start))
    logging.info("{}: gradient check at the initial guess {:.2e}".format(problem, check_initial))

    for m in cfg.mesh_schedule:
        if profile.m != m:
            profile = profile.resample(m)
        for eps in cfg.smoothing_levels(target_epsilon):
            objective = _with_gradient_mode(build(m, eps), cfg)
            x, diag = minimize_bfgs(objective, extract(profile), cfg)
            iterations, evaluations, newton_iterations = diag.iterations, diag.n_evaluations, 0
            if not diag.converged:
                logging.debug(
                    "{}: BFGS stopped with {} at |g| = {:.2e}, refining".format(
                        problem, diag.status.value, diag.grad_norm
                    )
                )
                x, refined = _refine(objective, x, cfg)
                if refined is not None:
                    newton_iterations = refined.iterations
                    evaluations += refined.n_evaluations
                    diag = refined
            profile = embed(m, x)
            stage = StageReport(
                m,
                eps,
                diag.status,
                iterations,
                diag.grad_norm,
                diag.fun,
                diag.fallbacks,
                evaluations,
                newton_iterations,
            )
            stages.append(stage)
            logging.info(
                "{}: m = {:d}, epsilon = {:.1e}, {} after {:d} + {:d} iterations, |g| = {:.2e}".format(
                    problem, m, eps, diag.status.value, iterations, newton_iterations, diag.grad_norm
                )
            )
            if eps == target_epsilon and not stage.converged:
                logging.warning(
                    "{}: stage m = {:d} did not converge ({})".format(
                        problem, m, diag.status.value
                    )
                )

    final = build(profile.m, target_epsilon)
    method = Difference.COMPLEX if hasattr(final, "value") else Difference.CENTRAL
    check_final = grad_check(final, extract(profile), method=method)
    logging.info("{}: gradient check at the solution {:.2e}".format(problem, check_final))
    return profile, stages, check_initial, check_final


def _initial_quarter(cfg: SolverConfig, m: int) -> RadialProfile:
    guess = cfg.initial_guess
    if guess.kind is InitKind.EXPLICIT:
        profile = guess.profile.to(Representation.U)
        QuarterConfig(profile)
        return profile.resample(m)
    value = DEFAULT_QUARTER_U0 if guess.value is None else guess.value
    theta = uniform_grid(0.0, np.pi / 2, m)
    return RadialProfile(theta, value + guess.noise(m), Representation.U)


def solve_quarter(
    params: ModelParams, cfg: SolverConfig, form: BoundaryTermForm = BoundaryTermForm()
) -> SolveReport:
    """Minimize the discretized quarter-circle energy over u = -log(rho)

    Args:
        params (ModelParams): Model parameters, epsilon is the target regularization
        cfg (SolverConfig): Solver settings and mesh schedule
        form (BoundaryTermForm): Boundary term variant

    Returns:
        report (SolveReport): Final u profile, energy breakdown, stage diagnostics,
            admissibility and the two-arc fit
    """
    if params.epsilon == 0:
        logging.warning(
            "epsilon = 0: the quarter integrand is not differentiable where f vanishes"
        )

    def build(m, eps):
        return QuarterObjective(m, params.from_self(epsilon=eps), form)

    def embed(m, x):
        return RadialProfile(uniform_grid(0.0, np.pi / 2, m), x, Representation.U)

    start = _initial_quarter(cfg, cfg.mesh_schedule[0])
    profile, stages, check_initial, check_final = _continuation(
        "quarter", build, start, lambda p: np.array(p.values), embed, params.epsilon, cfg
    )

    config = QuarterConfig(profile)
    if not config.admissible:
        logging.warning("quarter: the jump curve leaves the unit disk (rho >= 1)")
    settings = _settings(cfg)
    settings.update({"boundary_form": form.tag.value, "g": form.g.value})
    return SolveReport(
        "quarter",
        profile,
        quarter_total(profile, params, form),
        params,
        params.epsilon,
        stages,
        check_initial,
        check_final,
        admissible=config.admissible,
        fit=fit_parabolic_arcs(profile),
        settings=settings,
        grad_tol=cfg.grad_tol,
    )


def _initial_rectangle(cfg: SolverConfig, L: float, m: int) -> np.ndarray:
    """Normalized rho / L on the first mesh, ends pinned to one"""
    guess = cfg.initial_guess
    if guess.kind is InitKind.EXPLICIT:
        profile = guess.profile.to(Representation.RHO)
        RectangleConfig(L, L, profile)
        rho = profile.resample(m).values / L
    else:
        value = 1.0 if guess.value is None else guess.value
        if not value > 0:
            raise InvalidArgumentException("The initial rho / L must be positive")
        rho = value * np.exp(guess.noise(m))
    rho[0] = rho[-1] = 1.0
    return rho


def solve_rectangle(L: float, H: float, params: ModelParams, cfg: SolverConfig) -> SolveReport:
    """Minimize the rectangle jump energy over curves pinned at rho(0) = rho(pi) = L

    The unknowns are the interior values of rho / L or of -log(rho / L), so the
    result scales exactly with L.

    Returns:
        report (SolveReport): rho profile, energy, stage diagnostics and the distances
            to L / (1 + sin theta)
    """
    if not L > 0 or not H > L / 2:
        raise InvalidArgumentException("Rectangle needs L > 0 and H > L/2")
    rep = cfg.representation

    def build(m, eps):
        return RectangleObjective(m, params.from_self(epsilon=eps), rep)

    def to_stored(rho: np.ndarray) -> np.ndarray:
        return rho if rep is Representation.RHO else -np.log(rho)

    pinned = to_stored(np.ones(1))[0]

    def embed(m, x):
        return RadialProfile(
            uniform_grid(0.0, np.pi, m), np.concatenate([[pinned], x, [pinned]]), rep
        )

    m0 = cfg.mesh_schedule[0]
    start = RadialProfile(uniform_grid(0.0, np.pi, m0), to_stored(_initial_rectangle(cfg, L, m0)), rep)
    normalized, stages, check_initial, check_final = _continuation(
        "rectangle", build, start, lambda p: np.array(p.values[1:-1]), embed, params.epsilon, cfg
    )

    profile = RadialProfile(normalized.theta, L * normalized.rho)
    config = RectangleConfig(L, H, profile)
    error = np.abs(profile.rho - parabola_rho(profile.theta, L))
    errors = {
        "linf": float(np.max(error)),
        "l1": float(trapezoid_weights(profile.m, profile.h) @ error),
        "cartesian": parabola_cartesian_residual(profile, L),
    }
    energy = rectangle_jump_energy(config, params)
    settings = _settings(cfg)
    settings.update({"L": L, "H": H, "unknowns": rep.value})
    return SolveReport(
        "rectangle",
        profile,
        EnergyBreakdown(0.0, energy, 0.0),
        params,
        params.epsilon,
        stages,
        check_initial,
        check_final,
        errors=errors,
        settings=settings,
        grad_tol=cfg.grad_tol,
    )
