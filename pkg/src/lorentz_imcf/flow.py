"""Time integration of inverse mean curvature flow for radial graphs.

The graph height ``u`` over the cap evolves by ``du/dt = -v / H`` with a zero
conormal derivative on the boundary.  Writing ``phi = log u`` the same
equation reads

    dphi/dt = -(1 - |D phi|^2) / (n + (sigma^ij + phi^i phi^j / v^2) phi_ij).

Round graphs shrink self-similarly, ``u = R0 exp(-t/n)``, so the rescaled
height ``u_res = u / Theta(t, c)`` with ``Theta = exp(-t/n + c)`` obeys
``du_res/dt = -v / H(u_res) + u_res / n`` and has every constant as a fixed
point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from . import graph_geometry as gg
from .discretization import Field, Grid, build_grid, point_data
from .errors import (ConfigError, MeanConvexityLoss, MonitorFailure,
                     SingularityGuard, SpacelikeViolation)

log = logging.getLogger(__name__)

EPS_H = 1e-8
EPS_SPACELIKE = gg.EPS_SPACELIKE


def theta(t, c, n):
    """Scale factor of the round solution, ``exp(-t/n + c)``."""
    return np.exp(-t / n + c)


@dataclass
class InitialData:
    """``constant:R0`` or ``bump:R0,eps`` with ``u0 = R0 (1 + eps cos(pi rho / rho_max))``."""

    kind: str = "constant"
    R0: float = 1.5
    eps: float = 0.0

    @classmethod
    def parse(cls, text):
        kind, _, args = str(text).strip().partition(":")
        kind = kind.strip()
        try:
            vals = [float(a) for a in args.split(",")] if args.strip() else []
        except ValueError:
            raise ConfigError(f"bad initial data arguments in {text!r}") from None
        if kind == "constant" and len(vals) == 1:
            data = cls("constant", vals[0], 0.0)
        elif kind == "bump" and len(vals) in (1, 2):
            data = cls("bump", vals[0], vals[1] if len(vals) == 2 else 0.05)
        else:
            raise ConfigError(
                f"initial data must be constant:R0 or bump:R0,eps, got {text!r}")
        if not data.R0 > 0:
            raise ConfigError("R0 must be positive")
        if not abs(data.eps) < 1:
            raise ConfigError("bump amplitude must satisfy |eps| < 1")
        return data

    def __str__(self):
        if self.kind == "constant":
            return f"constant:{self.R0!r}"
        return f"bump:{self.R0!r},{self.eps!r}"

    def sample(self, grid: Grid):
        if self.kind == "constant":
            return np.full(grid.interior_shape, self.R0)
        return self.R0 * (1.0 + self.eps * np.cos(np.pi * grid.rho / grid.rho_max))


@dataclass
class FlowConfig:
    mode: str = "radial"
    n: int = 2
    rho_max: float = 1.0
    cells: int = 256
    cells_theta: int = 16
    cfl_gamma: float = 0.2
    dt: float | None = None
    t_end: float = 2.0
    u0: InitialData = field(default_factory=InitialData)
    c_convention: str = "midpoint"
    out_dir: str = "out"
    csv_every: int = 100
    snapshot_every: int = 0
    tol_c0: float = 1e-6
    tol_phidot: float = 1e-6
    tol_grad: float = 1e-6
    slack_h2: float = 1.0
    tol_area: float = 5e-3
    tol_conv: float = 1e-6
    tol_rescaled_area: float = 5e-3
    tol_rinf: float = 1e-3
    h_theta_ceiling: float = 1e6
    eps_H: float = EPS_H
    eps_spacelike: float = EPS_SPACELIKE

    def __post_init__(self):
        if isinstance(self.u0, str):
            self.u0 = InitialData.parse(self.u0)
        if not 0 < self.cfl_gamma <= 0.5:
            raise ConfigError(f"cfl_gamma must lie in (0, 0.5], got {self.cfl_gamma}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if int(self.csv_every) != self.csv_every or self.csv_every < 1:
            raise ConfigError("csv_every must be a positive integer")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be a non-negative integer")
        parse_c_convention(self.c_convention)

    def grid(self) -> Grid:
        return build_grid(self.mode, self.n, self.rho_max, self.cells, self.cells_theta)

    @property
    def slack(self):
        """Discretization allowance added to the maximum-principle tolerances."""
        h = self.rho_max / self.cells
        return self.slack_h2 * h * h


def parse_c_convention(text):
    text = str(text).strip()
    if text == "midpoint":
        return "midpoint", None
    kind, _, val = text.partition(":")
    if kind.strip() == "value":
        try:
            return "value", float(val)
        except ValueError:
            pass
    raise ConfigError(f"c_convention must be 'midpoint' or 'value:<c>', got {text!r}")


def resolve_c(convention, phi0):
    """Rescaling constant from initial log-heights; must lie in [inf, sup]."""
    kind, val = parse_c_convention(convention)
    lo, hi = float(np.min(phi0)), float(np.max(phi0))
    if kind == "midpoint":
        return 0.5 * (lo + hi)
    slop = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not lo - slop <= val <= hi + slop:
        raise ConfigError(f"c = {val} outside [inf phi0, sup phi0] = [{lo}, {hi}]")
    return val


@dataclass
class GraphState:
    t: float
    u: np.ndarray
    c: float
    mode: str = "raw"

    def raw_u(self, n):
        if self.mode == "raw":
            return self.u
        return self.u * theta(self.t, self.c, n)

    def rescaled_u(self, n):
        if self.mode == "rescaled":
            return self.u
        return self.u / theta(self.t, self.c, n)


# --- right-hand sides ---------------------------------------------------------

def log_operator(grid: Grid, u):
    """``|D phi|^2`` and ``q = n + (sigma^ij + phi^i phi^j / v^2) phi_ij``.

    Radial grids use the reduction ``q = n + phi_rr / v^2 + (n-1) coth(rho) phi_r``;
    disk grids contract the chart tensors directly.
    """
    f = Field.from_interior(grid, u)
    vals = f.values
    if grid.mode == "radial":
        h = grid.spacing[0]
        ui = vals[1:-1]
        p = (vals[2:] - vals[:-2]) / (2 * h) / ui
        pp = (vals[2:] - 2 * ui + vals[:-2]) / h ** 2 / ui - p * p
        grad_sq = p * p
        v2 = 1.0 - grad_sq
        with np.errstate(divide="ignore", invalid="ignore"):
            q = grid.n + pp / v2 + (grid.n - 1) * grid.coth * p
        return grad_sq, q
    d = point_data(grid, u)
    _, dphi, hphi = d.log_derivatives()
    phi_up = np.einsum("...ij,...j->...i", grid.sigma_inv, dphi)
    grad_sq = np.einsum("...i,...i->...", dphi, phi_up)
    v2 = 1.0 - grad_sq
    with np.errstate(divide="ignore", invalid="ignore"):
        sig_t = grid.sigma_inv + phi_up[..., :, None] * phi_up[..., None, :] / v2[..., None, None]
    q = grid.n + np.einsum("...ij,...ij->...", sig_t, hphi)
    return grad_sq, q


def _guard(grid, u, grad_sq, q, eps_H, eps_sp):
    v2 = 1.0 - grad_sq
    if np.any(v2 <= eps_sp):
        i = int(np.argmin(v2))
        raise SpacelikeViolation(
            f"1 - |D phi|^2 = {v2.flat[i]:.3e} at node {i}", worst=float(v2.flat[i]), index=i)
    H = q / (u * np.sqrt(v2))
    if np.any(~(H > eps_H)):
        i = int(np.argmin(np.where(np.isnan(H), -np.inf, H)))
        raise MeanConvexityLoss(f"H = {H.flat[i]:.3e} at node {i}", worst=float(H.flat[i]),
                                index=i)
    return H


def rhs_phi(state: GraphState, grid: Grid, eps_H=EPS_H, eps_spacelike=EPS_SPACELIKE):
    """``dphi/dt`` in log form; for rescaled states includes the ``+1/n`` drift."""
    grad_sq, q = log_operator(grid, state.u)
    _guard(grid, state.u, grad_sq, q, eps_H, eps_spacelike)
    rate = -(1.0 - grad_sq) / q
    if state.mode == "rescaled":
        rate = rate + 1.0 / grid.n
    return rate


def rhs_raw(state: GraphState, grid: Grid, eps_H=EPS_H, eps_spacelike=EPS_SPACELIKE):
    """``du/dt = -v / H`` with v and H from the graph-geometry kernel."""
    d = point_data(grid, state.u)
    v = gg.spacelike_factor(d, eps_spacelike)
    H, _, _ = gg.mean_curvature(d, eps_spacelike)
    if np.any(~(H > eps_H)):
        i = int(np.argmin(np.where(np.isnan(H), -np.inf, H)))
        raise MeanConvexityLoss(f"H = {H.flat[i]:.3e} at node {i}", worst=float(H.flat[i]),
                                index=i)
    return -v / H


def rhs_rescaled(state: GraphState, grid: Grid, eps_H=EPS_H, eps_spacelike=EPS_SPACELIKE):
    """``du_res/dt = -v / H(u_res) + u_res / n``."""
    return rhs_raw(state, grid, eps_H, eps_spacelike) + state.u / grid.n


def default_rhs(state):
    return rhs_raw if state.mode == "raw" else rhs_rescaled


# --- time stepping ------------------------------------------------------------

def max_diffusivity(state: GraphState, grid: Grid):
    """Largest eigenvalue of ``(sigma^ij + phi^i phi^j / v^2) / (u H)^2`` over nodes.

    Eigenvalues are taken in the grid's coordinates: the orthonormal frame on
    radial grids (where the value is ``1/q^2``) and the chart on disk grids.
    """
    u = np.ascontiguousarray(state.u, dtype=float)
    if grid.mode == "radial":
        return float(_kernels.radial_max_diffusivity(u, *_grid_args(grid)))
    return float(_kernels.disk_max_diffusivity(u, *_grid_args(grid)))


def cfl_dt(state: GraphState, grid: Grid, gamma=0.2):
    """``gamma h_min^2 / D_max`` for the explicit parabolic update."""
    if not 0 < gamma <= 0.5:
        raise ConfigError(f"cfl gamma must lie in (0, 0.5], got {gamma}")
    return gamma * grid.h_min ** 2 / max_diffusivity(state, grid)


def _grid_args(grid):
    """Grid arrays in the order the compiled kernels expect them."""
    if grid.mode == "radial":
        return grid.spacing[0], grid.coth, float(grid.n)
    return (grid.spacing[0], grid.dtheta1, grid.dtheta2, grid.r,
            np.ascontiguousarray(grid.cos[0]),
            np.ascontiguousarray(grid.sin[0]))


def _raise_status(status, idx):
    if status == _kernels.SPACELIKE:
        raise SpacelikeViolation(f"spacelike guard tripped at node {idx}", index=idx)
    raise MeanConvexityLoss(f"mean-convexity guard tripped at node {idx}", index=idx)


def step(state: GraphState, grid: Grid, dt, rhs: Callable | None = None,
         eps_H=EPS_H, eps_spacelike=EPS_SPACELIKE) -> GraphState:
    """One third-order SSP Runge-Kutta step.

    With ``rhs=None`` the compiled kernel for the grid runs the flow given by
    ``state.mode``; an explicit ``rhs`` goes through the numpy route.  Ghosts are rebuilt from the
    interior for every stage evaluation.
    """
    if rhs is None:
        u = np.ascontiguousarray(state.u, dtype=float)
        out = np.empty_like(u)
        kernel = _kernels.radial_ssp_rk3 if grid.mode == "radial" else _kernels.disk_ssp_rk3
        status, idx = kernel(u, float(dt), *_grid_args(grid), state.mode == "rescaled",
                             eps_H, eps_spacelike, out)
        if status != _kernels.OK:
            _raise_status(status, idx)
        return GraphState(state.t + dt, out, state.c, state.mode)

    rhs = rhs or default_rhs(state)

    def L(u):
        return rhs(replace(state, u=u), grid, eps_H, eps_spacelike)

    u = state.u
    u1 = u + dt * L(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * L(u1))
    new = 1.0 / 3.0 * u + 2.0 / 3.0 * (u2 + dt * L(u2))
    validate_state(GraphState(state.t + dt, new, state.c, state.mode), grid,
                   eps_H, eps_spacelike)
    return GraphState(state.t + dt, new, state.c, state.mode)


def validate_state(state: GraphState, grid: Grid, eps_H=EPS_H, eps_spacelike=EPS_SPACELIKE):
    """Positivity, spacelikeness and strict mean convexity; raises on failure."""
    if not np.all(np.isfinite(state.u)) or np.any(state.u <= 0):
        raise SpacelikeViolation("graph height left the positive range")
    grad_sq, q = log_operator(grid, state.u)
    _guard(grid, state.u, grad_sq, q, eps_H, eps_spacelike)


def initial_state(config: FlowConfig, grid: Grid | None = None, flow="raw"):
    """Sample and validate initial data; rejected data is a config error."""
    grid = grid or config.grid()
    u0 = config.u0.sample(grid)
    try:
        validate_state(GraphState(0.0, u0, 0.0), grid, config.eps_H, config.eps_spacelike)
    except SingularityGuard as exc:
        raise ConfigError(f"initial data {config.u0} is not strictly mean convex "
                          f"and spacelike: {exc}") from None
    c = resolve_c(config.c_convention, np.log(u0))
    if flow == "raw":
        return GraphState(0.0, u0, c, "raw")
    if flow == "rescaled":
        return GraphState(0.0, u0 / theta(0.0, c, grid.n), c, "rescaled")
    raise ValueError(f"unknown flow {flow!r}")


def _advance(state, grid, config, max_steps):
    """Compiled multi-step loop; same step selection as :func:`cfl_dt`."""
    u = np.array(state.u, dtype=float)
    fixed = float(config.dt) if config.dt is not None else -1.0
    common = (float(state.t), float(config.t_end), int(max_steps), float(config.cfl_gamma),
              fixed)
    flags = (state.mode == "rescaled", float(config.eps_H), float(config.eps_spacelike))
    if grid.mode == "radial":
        status, idx, taken, t, dt = _kernels.radial_advance(
            u, *common, *_grid_args(grid), *flags)
    else:
        status, idx, taken, t, dt = _kernels.disk_advance(
            u, *common, grid.h_min, *_grid_args(grid), *flags)
    new = GraphState(t, u, state.c, state.mode)
    if status != _kernels.OK:
        try:
            _raise_status(status, idx)
        except SingularityGuard as exc:
            exc.state = new
            raise
    return new, taken, dt


def evolve(config: FlowConfig, flow="raw", on_snapshot=None):
    """Integrate to ``config.t_end``; returns ``(records, final_state)``.

    A record is taken at t = 0 and after every ``csv_every`` accepted steps.
    ``on_snapshot(index, state, grid)`` is called for the initial state, every
    ``snapshot_every`` steps (if non-zero) and the final state.
    """
    from .monitors import make_record, hard_check

    grid = config.grid()
    state = initial_state(config, grid, flow)
    records = [make_record(state, grid, 0.0)]
    if on_snapshot:
        on_snapshot(0, state, grid)
    steps = 0
    t_end = config.t_end
    try:
        while state.t < t_end:
            chunk = config.csv_every - steps % config.csv_every
            if on_snapshot and config.snapshot_every:
                chunk = min(chunk, config.snapshot_every - steps % config.snapshot_every)
            state, taken, dt = _advance(state, grid, config, chunk)
            steps += taken
            if steps % config.csv_every == 0:
                rec = make_record(state, grid, dt)
                hard_check(rec)
                records.append(rec)
            if on_snapshot and config.snapshot_every and steps % config.snapshot_every == 0:
                on_snapshot(steps, state, grid)
        validate_state(state, grid, config.eps_H, config.eps_spacelike)
    except (SingularityGuard, MonitorFailure) as exc:
        exc.t = state.t
        exc.records = records
        exc.state = state
        raise
    if on_snapshot and not (config.snapshot_every and steps % config.snapshot_every == 0):
        on_snapshot(steps, state, grid)
    log.info("finished %s flow: %d steps to t=%g", flow, steps, state.t)
    return records, state
