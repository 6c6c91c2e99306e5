import math
from dataclasses import replace

import numpy as np
import pytest

from lorentz_imcf.discretization import build_grid
from lorentz_imcf.errors import ConfigError, MeanConvexityLoss, SpacelikeViolation
from lorentz_imcf.flow import (FlowConfig, GraphState, InitialData, cfl_dt, evolve,
                               initial_state, log_operator, max_diffusivity, resolve_c,
                               rhs_phi, rhs_raw, rhs_rescaled, step, theta)


def test_theta_examples():
    assert theta(0.0, 0.0, 2) == 1
    assert abs(theta(2 * math.log(2), 0.0, 2) - 0.5) < 1e-15
    assert abs(theta(2.0, 0.0, 2) - 0.36787944117144233) < 1e-15


def test_initial_data_parsing():
    d = InitialData.parse("bump:1.5,0.05")
    assert (d.kind, d.R0, d.eps) == ("bump", 1.5, 0.05)
    assert InitialData.parse("constant:2").R0 == 2
    assert str(InitialData.parse(str(d))) == str(d)
    for bad in ("bump", "circle:1", "constant:x", "constant:-1", "bump:1,1.5"):
        with pytest.raises(ConfigError):
            InitialData.parse(bad)


def test_bump_satisfies_neumann():
    g = build_grid("radial", 2, 1.0, 64)
    u = InitialData.parse("bump:1.5,0.05").sample(g)
    assert u[0] == u.max() and u[-1] == u.min()


@pytest.mark.parametrize("kwargs", [
    dict(cfl_gamma=0.0), dict(cfl_gamma=0.6), dict(t_end=0.0), dict(dt=-1.0),
    dict(csv_every=0), dict(snapshot_every=-1), dict(c_convention="median"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        FlowConfig(**kwargs)


def test_c_range():
    phi0 = np.log(np.array([1.4, 1.6]))
    assert resolve_c("midpoint", phi0) == pytest.approx(0.5 * sum(np.log([1.4, 1.6])))
    assert resolve_c("value:0.4", phi0) == 0.4
    with pytest.raises(ConfigError):
        resolve_c("value:1.0", phi0)


def round_state(grid, R0=1.5, mode="raw", c=0.0):
    return GraphState(0.0, np.full(grid.interior_shape, R0), c, mode)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_round_rates(n):
    g = build_grid("radial", n, 1.0, 32)
    s = round_state(g)
    assert np.allclose(rhs_raw(s, g), -1.5 / n, rtol=1e-14)
    assert np.allclose(rhs_phi(s, g), -1.0 / n, rtol=1e-14)


def test_round_rates_disk():
    g = build_grid("disk", 2, 1.0, 16, 8)
    s = round_state(g)
    assert np.abs(rhs_raw(s, g) + 0.75).max() < 1e-13


def test_rescaled_round_fixed_point():
    for g in (build_grid("radial", 2, 1.0, 32), build_grid("disk", 2, 1.0, 16, 8)):
        s = round_state(g, mode="rescaled")
        assert np.abs(rhs_rescaled(s, g)).max() < 1e-14
        new = step(s, g, cfl_dt(s, g))
        assert np.abs(new.u - 1.5).max() <= 1e-14


def perturbed(grid, eps=0.05, mode="raw"):
    u = 1.5 * (1 + eps * np.cos(np.pi * grid.rho / grid.rho_max))
    if grid.mode == "disk":
        u = u * (1 + 0.01 * grid.r2d ** 2 * (grid.cos + np.sin(2 * grid.theta)))
    return GraphState(0.0, u, 0.0, mode)


@pytest.mark.parametrize("mode", ["radial", "disk"])
def test_route_equivalence(mode):
    g = build_grid(mode, 2, 1.0, 32, 8)
    s = perturbed(g)
    assert np.abs(rhs_raw(s, g) - s.u * rhs_phi(s, g)).max() <= 1e-10
    r = replace(s, mode="rescaled")
    assert np.abs(rhs_rescaled(r, g) - r.u * rhs_phi(r, g)).max() <= 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_radial_reduction_matches_tensor_route(n):
    # the scalar reduction against the generic tensor contraction of graph_geometry
    g = build_grid("radial", n, 1.0, 64)
    s = perturbed(g)
    grad_sq, q = log_operator(g, s.u)
    H_tensor = -np.sqrt(1 - grad_sq) / rhs_raw(s, g)
    assert np.abs(q / (s.u * np.sqrt(1 - grad_sq)) - H_tensor).max() <= 1e-10


@pytest.mark.parametrize("mode", ["radial", "disk"])
@pytest.mark.parametrize("flow", ["raw", "rescaled"])
def test_compiled_step_matches_numpy_route(mode, flow):
    from lorentz_imcf.flow import default_rhs
    g = build_grid(mode, 2, 1.0, 32, 8)
    s = perturbed(g, mode=flow)
    dt = cfl_dt(s, g)
    a = step(s, g, dt)
    b = step(s, g, dt, rhs=default_rhs(s))
    assert np.abs(a.u - b.u).max() <= 1e-14


def test_linear_probe_restores_round_graph():
    g = build_grid("radial", 2, 1.0, 64)
    dev = 1e-4 * np.cos(np.pi * g.rho)
    s = GraphState(0.0, 1.5 + dev, 0.0, "rescaled")
    rate = rhs_rescaled(s, g)
    # the weighted L2 size of the deviation from its mean decreases
    w = g.quad_weights
    mean_dev = dev - np.sum(w * dev) / np.sum(w)
    assert np.sum(w * rate * mean_dev) < 0


def test_cfl_dt_round_fixture():
    g = build_grid("radial", 2, 1.0, 64)
    s = round_state(g)
    # D = lambda_max(sigma^-1) / (u H)^2 = 1/4, so dt = gamma h^2 * 4
    assert max_diffusivity(s, g) == pytest.approx(0.25, rel=1e-14)
    h = 1 / 64
    assert cfl_dt(s, g, 0.2) == pytest.approx(0.8 * h * h, rel=1e-14)
    g2 = build_grid("radial", 2, 1.0, 128)
    assert cfl_dt(round_state(g2), g2, 0.2) == pytest.approx(cfl_dt(s, g, 0.2) / 4, rel=1e-14)
    with pytest.raises(ConfigError):
        cfl_dt(s, g, 0.0)


def test_disk_diffusivity_matches_eigenvalues():
    from lorentz_imcf.discretization import point_data
    g = build_grid("disk", 2, 1.0, 16, 8)
    s = perturbed(g)
    grad_sq, q = log_operator(g, s.u)
    _, dphi, _ = point_data(g, s.u).log_derivatives()
    up = np.einsum("...ij,...j->...i", g.sigma_inv, dphi)
    v2 = 1 - grad_sq
    sig_t = g.sigma_inv + up[..., :, None] * up[..., None, :] / v2[..., None, None]
    expected = np.max(np.linalg.eigvalsh(sig_t)[..., -1] * v2 / q ** 2)
    assert max_diffusivity(s, g) == pytest.approx(expected, rel=1e-12)


def test_single_step_round_error_is_fourth_order():
    g = build_grid("radial", 2, 1.0, 32)
    errs = []
    for dt in (0.04, 0.02):
        new = step(round_state(g), g, dt)
        errs.append(abs(new.u[0] / (1.5 * math.exp(-dt / 2)) - 1))
    assert 14 < errs[0] / errs[1] < 18


def test_step_doubling():
    g = build_grid("radial", 2, 1.0, 32)
    s = perturbed(g)
    diffs = []
    for dt in (4e-4, 2e-4):
        full = step(s, g, dt)
        half = step(step(s, g, dt / 2), g, dt / 2)
        diffs.append(np.abs(full.u - half.u).max())
    assert 12 < diffs[0] / diffs[1] < 20


def test_rescaled_equation_from_raw_trajectory():
    # u_res(t) = u(t) / Theta(t) from raw steps satisfies the rescaled equation
    g = build_grid("radial", 2, 1.0, 32)
    c = 0.3
    s = perturbed(g)
    dt = 2e-4
    states = [s]
    for _ in range(2):
        states.append(step(states[-1], g, dt))
    res = [st.u / theta(st.t, c, 2) for st in states]
    d_dt = (res[2] - res[0]) / (2 * dt)
    mid = GraphState(states[1].t, res[1], c, "rescaled")
    assert np.abs(d_dt - rhs_rescaled(mid, g)).max() < 1e-5


def test_guards():
    g = build_grid("radial", 2, 1.0, 32)
    u = np.full(32, 1.0)
    u[10] = 3.0
    with pytest.raises(SpacelikeViolation):
        rhs_raw(GraphState(0.0, u, 0.0), g)
    with pytest.raises(SpacelikeViolation):
        rhs_phi(GraphState(0.0, u, 0.0), g)
    # a dip that keeps |D phi| < 1 but makes H negative
    dip = 1.0 - 0.02 * np.exp(-((g.rho - 0.5) / 0.03) ** 2)
    with pytest.raises(MeanConvexityLoss):
        rhs_raw(GraphState(0.0, dip, 0.0), g)
    with pytest.raises(MeanConvexityLoss):
        step(GraphState(0.0, dip, 0.0), g, 1e-4)


def test_nonconvex_initial_data_is_config_error():
    with pytest.raises(ConfigError):
        initial_state(FlowConfig(u0="bump:1.0,0.9"))


def test_huge_step_trips_guard():
    cfg = FlowConfig(u0="bump:1.5,0.05", dt=0.5, t_end=1.0)
    with pytest.raises((MeanConvexityLoss, SpacelikeViolation)) as info:
        evolve(cfg)
    assert info.value.state is not None and len(info.value.records) == 1


def test_evolve_constant_data(constant_run):
    cfg, records, state = constant_run
    assert state.t == 2.0
    assert np.abs(state.u / (1.5 * math.exp(-1)) - 1).max() < 1e-6
    assert records[0].t == 0 and records[-1].max_u < records[0].max_u


def test_evolve_bump_contracts(bump_run):
    cfg, records, state = bump_run
    assert state.t == cfg.t_end
    assert records[-1].max_u < records[0].max_u
    assert all(b.max_u < a.max_u for a, b in zip(records, records[1:]))


def test_record_cadence():
    cfg = FlowConfig(u0="bump:1.5,0.05", cells=32, t_end=0.05, csv_every=7)
    snaps = []
    records, state = evolve(cfg, on_snapshot=lambda i, s, g: snaps.append(i))
    steps = snaps[-1]
    assert len(records) == 1 + steps // 7
    assert snaps[0] == 0
    cfg2 = replace(cfg, snapshot_every=10)
    snaps2 = []
    evolve(cfg2, on_snapshot=lambda i, s, g: snaps2.append(i))
    assert snaps2[:3] == [0, 10, 20] and snaps2[-1] == steps
    assert len(snaps2) == len(set(snaps2))


def test_fixed_dt_is_used():
    cfg = FlowConfig(u0="constant:1.5", cells=32, t_end=0.01, dt=1e-3, csv_every=1)
    records, state = evolve(cfg)
    assert len(records) == 11
    assert all(r.dt_used == pytest.approx(1e-3) for r in records[1:])


@pytest.mark.parametrize("mode", ["radial", "disk"])
def test_cfl_bound_respected(mode):
    cfg = FlowConfig(mode=mode, u0="bump:1.5,0.05", cells=16, cells_theta=8, t_end=0.01,
                     snapshot_every=1)
    states = []
    evolve(cfg, on_snapshot=lambda i, s, g: states.append(replace(s, u=s.u.copy())))
    g = cfg.grid()
    assert len(states) > 3
    for a, b in zip(states, states[1:]):
        assert b.t - a.t <= cfl_dt(a, g, cfg.cfl_gamma) * (1 + 1e-12)
    assert states[-1].t == cfg.t_end


def test_n3_round_evolution():
    cfg = FlowConfig(n=3, u0="constant:1.5", cells=32, t_end=0.5, csv_every=1000)
    _, state = evolve(cfg)
    assert np.abs(state.u / (1.5 * math.exp(-0.5 / 3)) - 1).max() < 1e-9
