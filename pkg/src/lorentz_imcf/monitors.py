"""A-priori estimates and convergence claims as checks on recorded runs.

Every check is a pure function of a sequence of :class:`TrajectoryRecord`
rows plus scalar parameters, so a stored trajectory can be re-verified
without rerunning the flow.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import MonitorFailure
from .flow import FlowConfig, GraphState, log_operator, theta

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class TrajectoryRecord:
    t: float
    min_u: float
    max_u: float
    min_phi: float
    max_phi: float
    min_phidot: float
    max_phidot: float
    max_grad_phi: float
    min_H_theta: float
    max_H_theta: float
    area: float
    rescaled_area: float
    osc_rescaled_u: float
    dt_used: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return astuple(self)


@dataclass
class NodeFields:
    u: np.ndarray           # raw height
    u_rescaled: np.ndarray
    v: np.ndarray
    H: np.ndarray           # raw mean curvature
    H_theta: np.ndarray
    grad_phi: np.ndarray
    phidot: np.ndarray      # raw log-height speed, scale invariant


def node_fields(state: GraphState, grid) -> NodeFields:
    n = grid.n
    th = theta(state.t, state.c, n)
    w = state.u
    grad_sq, q = log_operator(grid, w)
    v2 = 1.0 - grad_sq
    v = np.sqrt(v2)
    H_w = q / (w * v)
    if state.mode == "raw":
        u, u_res, H, H_theta = w, w / th, H_w, H_w * th
    else:
        u, u_res, H, H_theta = w * th, w, H_w / th, H_w
    return NodeFields(u=u, u_rescaled=u_res, v=v, H=H, H_theta=H_theta,
                      grad_phi=np.sqrt(grad_sq), phidot=-v2 / q)


def make_record(state: GraphState, grid, dt_used) -> TrajectoryRecord:
    f = node_fields(state, grid)
    n = grid.n
    w = grid.quad_weights
    phi = np.log(f.u)
    return TrajectoryRecord(
        t=float(state.t),
        min_u=float(np.min(f.u)), max_u=float(np.max(f.u)),
        min_phi=float(np.min(phi)), max_phi=float(np.max(phi)),
        min_phidot=float(np.min(f.phidot)), max_phidot=float(np.max(f.phidot)),
        max_grad_phi=float(np.max(f.grad_phi)),
        min_H_theta=float(np.min(f.H_theta)), max_H_theta=float(np.max(f.H_theta)),
        area=float(np.sum(w * f.u ** n * f.v)),
        rescaled_area=float(np.sum(w * f.u_rescaled ** n * f.v)),
        osc_rescaled_u=float(np.max(f.u_rescaled) - np.min(f.u_rescaled)),
        dt_used=float(dt_used),
    )


def hard_check(rec: TrajectoryRecord):
    """Conditions that end a run immediately (exit code 2)."""
    if not all(math.isfinite(x) for x in rec.values()):
        raise MonitorFailure(f"non-finite monitor value at t={rec.t}")
    if rec.max_grad_phi >= 1.0:
        raise MonitorFailure(f"|D phi| = {rec.max_grad_phi} >= 1 at t={rec.t}")
    if rec.min_H_theta <= 0.0:
        raise MonitorFailure(f"H Theta = {rec.min_H_theta} <= 0 at t={rec.t}")


# --- oracles ------------------------------------------------------------------

def oracle_round(R0, n, t):
    """Exact height of the round solution, ``R0 exp(-t/n)``."""
    if not R0 > 0:
        raise ValueError("R0 must be positive")
    return R0 * np.exp(-np.asarray(t, dtype=float) / n)


def oracle_phi(c, n, t):
    """Log-height of the round solution started at ``phi = c``."""
    return -np.asarray(t, dtype=float) / n + c


# --- checks -------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    verdict: str
    violation: float
    t_worst: float
    detail: str = ""

    @property
    def passed(self):
        return self.verdict == PASS

    def line(self):
        s = f"{self.name}: {self.verdict} violation={self.violation:.6e} t={self.t_worst:.6g}"
        return s + (f" ({self.detail})" if self.detail else "")


def _worst(records, excess):
    """Largest positive excess over the run and where it happened."""
    vals = np.array([excess(r) for r in records], dtype=float)
    i = int(np.argmax(vals))
    return max(float(vals[i]), 0.0), records[i].t


def check_c0(records, phi1, phi2, n, tol=1e-6, name="c0"):
    """Sandwich ``-t/n + phi1 <= phi <= -t/n + phi2``."""
    viol, tw = _worst(records, lambda r: max(-r.t / n + phi1 - r.min_phi,
                                             r.max_phi - (-r.t / n + phi2)))
    return CheckResult(name, PASS if viol <= tol else FAIL, viol, tw)


def check_phidot(records, lo, hi, tol=1e-6, name="phidot"):
    """Log-height speed stays within its initial range."""
    viol, tw = _worst(records, lambda r: max(lo - r.min_phidot, r.max_phidot - hi))
    return CheckResult(name, PASS if viol <= tol else FAIL, viol, tw)


def check_gradient(records, grad0, tol=1e-6, name="gradient"):
    """``|D phi|`` never exceeds its initial maximum and stays below 1."""
    viol, tw = _worst(records, lambda r: r.max_grad_phi - grad0)
    top = max(r.max_grad_phi for r in records)
    if top >= 1.0:
        return CheckResult(name, FAIL, max(viol, top - 1.0), tw, "spacelike bound |D phi| < 1 lost")
    return CheckResult(name, PASS if viol <= tol else FAIL, viol, tw)


def check_h_theta(records, ceiling=1e6, name="h_theta"):
    """``H Theta`` stays positive and bounded over the run."""
    lo = min(records, key=lambda r: r.min_H_theta)
    hi = max(records, key=lambda r: r.max_H_theta)
    if not (lo.min_H_theta > 0):
        return CheckResult(name, FAIL, -lo.min_H_theta, lo.t, "lost positivity")
    if not (math.isfinite(hi.max_H_theta) and hi.max_H_theta <= ceiling):
        return CheckResult(name, FAIL, hi.max_H_theta - ceiling, hi.t, "exceeds ceiling")
    return CheckResult(name, PASS, 0.0, lo.t,
                       f"range [{lo.min_H_theta:.6g}, {hi.max_H_theta:.6g}]")


def check_area_law(records, tol=5e-3, name="area_law"):
    """``area(t) / area(0)`` follows ``exp(-t)``."""
    a0 = records[0].area
    viol, tw = _worst(records, lambda r: abs(r.area / a0 - math.exp(-r.t)))
    return CheckResult(name, PASS if viol <= tol else FAIL, viol, tw)


def rescaled_values(rec, n, c):
    th = theta(rec.t, c, n)
    return rec.min_u / th, rec.max_u / th


def check_rescaled_convergence(records, n, c, cap_area, final=None, tol_conv=1e-6,
                               tol_area=5e-3, tol_rinf=1e-3, tol_bracket=1e-9,
                               name="rescaled_convergence"):
    """Convergence of the rescaled height to the constant fixed by the area.

    Passes when (a) the final oscillation is below ``tol_conv``, (b) the
    rescaled area drifts by less than ``tol_area`` relative, (c) the limit
    matches ``exp(-c) (area0 / cap_area)^(1/n)`` within ``tol_rinf`` relative
    and (d) lies in ``[ratio^(1/n) / sup u0, ratio^(1/n) / inf u0]``.  A run
    that has not reached ``tol_conv`` is inconclusive rather than failed.

    ``final`` is the record of the final state; it defaults to the last row,
    which is the final state whenever the step count is a multiple of the
    CSV cadence.
    """
    first = records[0]
    last = final if final is not None else records[-1]
    ra0 = first.rescaled_area
    rows = list(records) if final is None else list(records) + [final]
    drift, t_drift = _worst(rows, lambda r: abs(r.rescaled_area / ra0 - 1.0))
    lo, hi = rescaled_values(last, n, c)
    r_inf = 0.5 * (lo + hi)
    ratio = (first.area / cap_area) ** (1.0 / n)
    predicted = math.exp(-c) * ratio
    bracket = (ratio / first.max_u, ratio / first.min_u)
    rel = abs(r_inf / predicted - 1.0)
    out_of_bracket = max(bracket[0] - r_inf, r_inf - bracket[1], 0.0) / r_inf
    detail = (f"osc={last.osc_rescaled_u:.3e} r_inf={r_inf:.12g} predicted={predicted:.12g} "
              f"bracket=[{bracket[0]:.12g}, {bracket[1]:.12g}] area_drift={drift:.3e}")
    if drift > tol_area:
        return CheckResult(name, FAIL, drift, t_drift, detail)
    if last.osc_rescaled_u >= tol_conv:
        return CheckResult(name, INCONCLUSIVE, last.osc_rescaled_u, last.t, detail)
    if rel > tol_rinf:
        return CheckResult(name, FAIL, rel, last.t, detail)
    if out_of_bracket > tol_bracket:
        return CheckResult(name, FAIL, out_of_bracket, last.t, detail)
    return CheckResult(name, PASS, max(rel, out_of_bracket), last.t, detail)


@dataclass
class InvariantReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self):
        lines = [c.line() for c in self.checks]
        lines.append(f"overall: {PASS if self.passed else FAIL}")
        return "\n".join(lines) + "\n"


def run_report(records, config: FlowConfig, c, cap_area, rescaled=False, final=None):
    """Every check applicable to a trajectory, using the config tolerances.

    Initial bounds (``phi1``, ``phi2``, initial speed range and gradient) are
    read off the first record.  ``final`` is an optional record of the final
    state, used by the convergence check.
    """
    n = config.n
    slack = config.slack
    r0 = records[0]
    checks = [
        check_c0(records, r0.min_phi, r0.max_phi, n, config.tol_c0 + slack),
        check_phidot(records, r0.min_phidot, r0.max_phidot, config.tol_phidot + slack),
        check_gradient(records, r0.max_grad_phi, config.tol_grad + slack),
        check_h_theta(records, config.h_theta_ceiling),
        check_area_law(records, config.tol_area),
    ]
    if rescaled:
        checks.append(check_rescaled_convergence(
            records, n, c, cap_area, final, config.tol_conv, config.tol_rescaled_area,
            config.tol_rinf))
    return InvariantReport(checks)
