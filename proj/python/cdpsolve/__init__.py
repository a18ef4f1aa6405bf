"""Sequential quadratic methods for constrained difference programs.

The heavy lifting happens in the compiled ``_core`` module; this package adds
numpy conversion and a couple of conveniences.
"""

from ._core import (
    ConfigError,
    Network,
    ParseError,
    SolverError,
    builtin_names,
    effective_config,
    load_network,
    parse_network,
    project_polyhedron,
    scenario_demand,
    solve_qp,
    synthetic_network,
)
from ._core import run as _run

import numpy as np

__all__ = [
    "ConfigError",
    "Network",
    "ParseError",
    "SolverError",
    "builtin_names",
    "effective_config",
    "load_network",
    "parse_network",
    "project_polyhedron",
    "run",
    "scenario_demand",
    "solve_qp",
    "synthetic_network",
]


def run(builtin="", network="", scenario="", algorithm="esqm", **overrides):
    """Solve a built-in problem or a network design instance.

    Keyword arguments other than the named ones override solver parameters,
    e.g. ``run(builtin="dc-abs", sigma=0.3)``. The per-iteration trace comes
    back as numpy arrays.
    """
    summary = _run(builtin=builtin, network=str(network), scenario=scenario,
                   algorithm=algorithm, overrides={k: float(v) for k, v in overrides.items()})
    summary["trace"] = {k: np.asarray(v) for k, v in summary["trace"].items()}
    return summary
