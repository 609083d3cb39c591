"""Subcommand implementations.

Each command takes a resolved ``RunConfig`` and returns a ``CommandResult``:
either a JSON-ready document or a table of rows, plus its exit code.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.cli.config import RunConfig
from src.density.bridge_density import lamperti_gaussian_factor
from src.density.chain import chain_transition_density
from src.density.closed_form import gaussian_proxy_density
from src.density.derivatives import Derivative
from src.edgeworth.corrections import (
    first_correction,
    first_correction_closed,
    first_ratio,
    second_correction,
    second_correction_closed,
    second_ratio,
)
from src.limits.experiments import (
    clt_experiment,
    euler_consistency_experiment,
    regime_ladder,
    remainder_ladder_check,
)
from src.limits.report import ExperimentReport
from src.models.grid import GridSpec
from src.models.validation import validate_assumptions
from src.paths.export import PATH_COLUMNS
from src.paths.simulate import (
    PathSample,
    simulate_chain,
    simulate_coarse_diffusion_batch,
    simulate_diffusion_euler,
)
from src.paths.streams import PathOrigin, RandomStream
from src.utils.errors import ConfigError

# Get the module logger
logger = logging.getLogger(__name__)

DENSITY_COLUMNS = ("t", "x", "y", "value", "stderr", "method")
EDGEWORTH_COLUMNS = ("t", "x", "y", "pi1", "pi2", "delta1", "delta2", "method", "nested_converged")
DENSITY_QUANTITIES = ("p", "proxy", "lamperti-factor", "chain") + tuple(d.value for d in Derivative)


@dataclass
class CommandResult:
    """Output of a subcommand: a report document or a table."""

    document: Optional[Dict[str, Any]] = None
    rows: List[Sequence[Any]] = field(default_factory=list)
    columns: Sequence[str] = ()
    exit_code: int = 0
    report: Optional[ExperimentReport] = None

    @property
    def is_table(self) -> bool:
        return self.document is None


def _report_result(report: ExperimentReport) -> CommandResult:
    return CommandResult(document=report.to_dict(), report=report)


def run_validate(config: RunConfig) -> CommandResult:
    """Check the configured models and grid against the standing assumptions.

    Exits with 2 when any check fails.
    """
    coeff = config.coefficient_model()
    innov = config.innovation_model(coeff)
    report = validate_assumptions(coeff, innov, config.grid_spec(), config.sample_grid(), config.schedule())
    return CommandResult(
        document={"validation": report.to_dict(), "all_passed": report.all_passed},
        exit_code=0 if report.all_passed else 2,
    )


def _simulated_paths(config: RunConfig) -> List[PathSample]:
    coeff = config.coefficient_model()
    grid = config.grid_spec()
    seed = config.mc["seed"]
    process = config.experiment["process"]
    x0 = config.experiment["x0"]
    count = config.experiment["paths"]
    if process == "chain":
        innov = config.innovation_model(coeff)
        return [simulate_chain(coeff, innov, x0, grid, RandomStream(seed, i)) for i in range(count)]
    if process == "euler":
        return [
            simulate_diffusion_euler(coeff, x0, grid.h, grid.fine_steps, RandomStream(seed, i))
            for i in range(count)
        ]
    values = simulate_coarse_diffusion_batch(coeff, x0, grid, seed, list(range(count)))
    times = np.arange(grid.n + 1) * grid.coarse_step
    return [PathSample(times, row, PathOrigin.EXACT_DIFFUSION, i) for i, row in enumerate(values)]


def run_simulate(config: RunConfig) -> CommandResult:
    """Simulate chain, Euler or coarse diffusion paths as a long table."""
    paths = _simulated_paths(config)
    rows = [
        (path.path_id, float(time), float(value), path.origin.value)
        for path in paths
        for time, value in zip(path.times, path.values)
    ]
    logger.info(f"Simulated {len(paths)} {config.experiment['process']} paths")
    return CommandResult(rows=rows, columns=PATH_COLUMNS)


def _points(experiment: Dict[str, Any]) -> List[tuple]:
    return list(itertools.product(experiment["t"], experiment["x"], experiment["y"]))


def run_density(config: RunConfig) -> CommandResult:
    """Evaluate a density quantity over the configured (t, x, y) grid.

    Quantities are "p", "proxy", "lamperti-factor", "chain" (the k-step chain
    density at t = kh) or a derivative name such as "dy3".
    """
    quantity = config.experiment["quantity"]
    if quantity not in DENSITY_QUANTITIES:
        raise ConfigError(f"experiment.quantity {quantity} is not supported")
    ctx = config.context()
    density = ctx.density
    rows = []
    if quantity == "chain":
        grid = config.grid_spec()
        for x in config.experiment["x"]:
            ys = np.asarray(config.experiment["y"], dtype=float)
            values = chain_transition_density(ctx.coeff, ctx.innov, grid, x, ys, config.lattice())
            rows.extend(
                (grid.coarse_step, x, y, float(v), 0.0, "convolution-oracle")
                for y, v in zip(ys, np.atleast_1d(values))
            )
        return CommandResult(rows=rows, columns=DENSITY_COLUMNS)

    for t, x, y in _points(config.experiment):
        stderr = 0.0
        method = density.method.value
        if quantity == "p":
            value, error = density.estimate(t, x, y)
            stderr = float(error)
        elif quantity == "proxy":
            value, method = gaussian_proxy_density(ctx.coeff, t, x, y), "closed-form"
        elif quantity == "lamperti-factor":
            value, method = lamperti_gaussian_factor(ctx.coeff, t, x, y), "closed-form"
        else:
            which = Derivative(quantity)
            value = density.derivative(t, x, y, which.order, which.wrt)
        rows.append((t, x, y, float(value), stderr, method))
    return CommandResult(rows=rows, columns=DENSITY_COLUMNS)


def run_edgeworth(config: RunConfig) -> CommandResult:
    """Tabulate pi1, pi2 and the ratios delta1, delta2 over the configured grid.

    The ratios are evaluated at the grid's kh and do not depend on t.
    Constant-coefficient models use the closed forms unless
    ``experiment.method`` is "quadrature".
    """
    ctx = config.context()
    method = config.experiment["method"]
    if method not in ("auto", "quadrature"):
        raise ConfigError(f"experiment.method must be auto or quadrature, got {method}")
    closed = ctx.closed_form_available and method == "auto"
    second_order = config.experiment["second_order"]
    ys = np.asarray(config.experiment["y"], dtype=float)

    rows = []
    for t, x in itertools.product(config.experiment["t"], config.experiment["x"]):
        if closed:
            pi1 = first_correction_closed(ctx, t, x, ys)
            pi2 = second_correction_closed(ctx, t, x, ys) if second_order else None
        else:
            pi1 = first_correction(ctx, t, x, ys)
            pi2 = second_correction(ctx, t, x, ys) if second_order else None
        delta1 = first_ratio(ctx, x, ys)
        delta2 = second_ratio(ctx, x, ys) if second_order else None
        for i, y in enumerate(ys):
            rows.append(
                (
                    t,
                    x,
                    float(y),
                    float(pi1[i]),
                    float(pi2.total[i]) if pi2 is not None else None,
                    float(delta1[i]),
                    float(delta2[i]) if delta2 is not None else None,
                    "closed-form" if closed else "quadrature",
                    pi2.nested_converged if pi2 is not None else None,
                )
            )
    return CommandResult(rows=rows, columns=EDGEWORTH_COLUMNS)


def run_regime(config: RunConfig) -> CommandResult:
    """First-order distance over a k ladder at the configured kh and n."""
    report = regime_ladder(
        config.context(), config.experiment["k_values"], config.monte_carlo(), config.experiment["x0"]
    )
    return _report_result(report)


def run_clt(config: RunConfig) -> CommandResult:
    """The CLT experiment with n = round(c k) at the configured k and kh."""
    grid = config.grid_spec()
    c = config.experiment["c"]
    n = max(1, int(round(c * grid.k)))
    clt_grid = GridSpec.from_coarse_step(grid.coarse_step, grid.k, n)
    report = clt_experiment(config.context(clt_grid), config.monte_carlo(), config.experiment["x0"], c_target=c)
    report.design["c_requested"] = c
    report.design["n_rounding"] = n - c * grid.k
    return _report_result(report)


def run_remainder(config: RunConfig) -> CommandResult:
    """Remainder ladder on the chain lattice at the configured kh."""
    report = remainder_ladder_check(
        config.context(),
        x=config.experiment["x"],
        k_values=config.experiment["k_values"],
        kh=config.grid_spec().coarse_step,
        lattice=config.lattice(),
    )
    return _report_result(report)


def run_euler_bench(config: RunConfig) -> CommandResult:
    """Euler consistency benchmark with coarse step kh and n observations."""
    grid = config.grid_spec()
    report = euler_consistency_experiment(
        config.coefficient_model(),
        grid.coarse_step,
        grid.n,
        config.experiment["k_values"],
        config.monte_carlo(),
        config.experiment["x0"],
    )
    return _report_result(report)


COMMANDS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "validate": run_validate,
    "simulate": run_simulate,
    "density": run_density,
    "edgeworth": run_edgeworth,
    "regime": run_regime,
    "clt": run_clt,
    "remainder": run_remainder,
    "euler-bench": run_euler_bench,
}
