import pytest

from lorentz_imcf.flow import FlowConfig, evolve

BUMP = "bump:1.5,0.05"


@pytest.fixture(scope="session")
def bump_run():
    """Raw bump run on the default 256-cell radial grid to t = 2."""
    cfg = FlowConfig(u0=BUMP, t_end=2.0, csv_every=10)
    records, state = evolve(cfg)
    return cfg, records, state


@pytest.fixture(scope="session")
def constant_run():
    cfg = FlowConfig(u0="constant:1.5", t_end=2.0, csv_every=50)
    records, state = evolve(cfg)
    return cfg, records, state


@pytest.fixture(scope="session")
def rescaled_bump_run():
    """Rescaled bump run to t = 20, midpoint c."""
    cfg = FlowConfig(u0=BUMP, t_end=20.0, csv_every=500)
    records, state = evolve(cfg, flow="rescaled")
    return cfg, records, state
