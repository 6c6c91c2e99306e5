"""Inverse mean curvature flow of spacelike graphs over hyperbolic caps.

Modules
-------
base_geometry
    Lorentz-Minkowski space, the hyperboloid and its graph chart.
graph_geometry
    Metric, normal, second fundamental form and mean curvature of radial graphs.
discretization
    Radial and polar-disk grids with ghost cells and stencils.
flow
    Raw and rescaled flows, SSP-RK3 time stepping and singularity guards.
monitors
    Maximum-principle checks, the area law and convergence diagnostics.
config, output, cli
    Configuration files, CSV output and the ``lorentz-imcf`` command.
"""

from .errors import (ConfigError, MeanConvexityLoss, MonitorFailure,
                     SingularityGuard, SpacelikeViolation)
from .flow import FlowConfig, GraphState, InitialData, evolve, initial_state, step, theta
from .discretization import build_grid
from .monitors import run_report

__all__ = [
    "ConfigError", "MeanConvexityLoss", "MonitorFailure", "SingularityGuard",
    "SpacelikeViolation", "FlowConfig", "GraphState", "InitialData", "evolve",
    "initial_state", "step", "theta", "build_grid", "run_report",
]
