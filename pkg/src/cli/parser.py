"""Command-line parser and the mapping from flags to configuration overrides."""

import argparse
from typing import Any, Dict

from src.cli.config import EXPERIMENT_DEFAULTS

# flag destination -> dotted configuration key
FLAG_KEYS = {
    "seed": "mc.seed",
    "workers": "mc.workers",
    "n_paths": "mc.n_paths",
    "out": "output.path",
    "format": "output.format",
    "k": "grid.k",
    "n": "grid.n",
    "h": "grid.h",
    "kh": "grid.kh",
    "model": "model.kind",
    "innovation": "innovation.kind",
    "mu3": "innovation.params.mu3",
    "c": "experiment.c",
}


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment and shared flags on each."""
    parser = argparse.ArgumentParser(
        prog="markovdiff",
        description="Markov chain to diffusion convergence: densities, corrections and experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")

    for name in EXPERIMENT_DEFAULTS:
        sub = subparsers.add_parser(name, help=f"Run the {name} subcommand")
        sub.add_argument("--config", type=str, default=None, help="JSON run configuration")
        sub.add_argument("--seed", type=int, default=None, help="Base seed of the random streams")
        sub.add_argument("--out", type=str, default=None, help="Output file (stdout when omitted)")
        sub.add_argument("--workers", type=int, default=None, help="Worker threads; never changes results")
        sub.add_argument("--format", type=str, choices=["csv", "json"], default=None, help="Output format")
        sub.add_argument("--log-level", type=str, default=None, help="Logging level")
        sub.add_argument("--timing", action="store_true", help="Include wall-clock time in JSON reports")
        sub.add_argument("--model", type=str, default=None, help="Coefficient model kind")
        sub.add_argument("--innovation", type=str, default=None, help="Innovation model kind")
        sub.add_argument("--mu3", type=float, default=None, help="Third moment of the mixture innovation")
        sub.add_argument("--k", type=int, default=None, help="Subsampling factor")
        sub.add_argument("--n", type=int, default=None, help="Number of coarse observations")
        sub.add_argument("--h", type=float, default=None, help="Fine time step")
        sub.add_argument("--kh", type=float, default=None, help="Coarse step; sets h = kh / k")
        sub.add_argument("--n-paths", dest="n_paths", type=int, default=None, help="Monte-Carlo paths")
        if "c" in EXPERIMENT_DEFAULTS[name]:
            sub.add_argument("--c", type=float, default=None, help="Ratio n / k")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted-key overrides for every flag that was given."""
    overrides = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    if "innovation.params.mu3" in overrides and "innovation.kind" not in overrides:
        overrides["innovation.kind"] = "mixture"
    return overrides
