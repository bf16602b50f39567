"""Fredholm network solvers for integral equations, two-point BVPs and the disc Laplace problem."""

import json
import os

from . import _core
from ._core import (
    EvalError,
    FredholmError,
    NumericalError,
    ParseError,
    ValidationError,
    eval_expr,
    example_names,
    free_vars,
    linear_network,
    plan_layers,
    render_expr,
    solve_fd,
)

__all__ = [
    "EvalError",
    "FredholmError",
    "NumericalError",
    "ParseError",
    "ValidationError",
    "eval_expr",
    "example_config",
    "example_names",
    "free_vars",
    "linear_network",
    "plan_layers",
    "render_csv",
    "render_expr",
    "run_example",
    "solve",
    "solve_fd",
]


def example_config(name):
    return json.loads(_core.example_config(name))


def run_example(name, deterministic=True, **overrides):
    """Run a registry example; overrides are grid, layers, kappa, scheme, queries, sweep."""
    return json.loads(_core.run_example(name, deterministic, **overrides))


def solve(config, deterministic=True):
    """Solve a config given as a dict or a path to a JSON file."""
    if isinstance(config, (str, os.PathLike)):
        with open(config) as fh:
            config = json.load(fh)
    return json.loads(_core.run_config(json.dumps(config), deterministic))


def render_csv(report):
    return _core.render_csv(json.dumps(report))
