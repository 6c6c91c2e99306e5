"""Cell-centred grids on a geodesic cap of H^n(1) and their stencils.

Two layouts are supported:

``radial``
    rotationally symmetric fields ``f(rho)`` on ``rho_i = (i + 1/2) h``,
    ``h = rho_max / N``, any ``n >= 2``.  Tensors live in the orthonormal
    geodesic-polar frame where ``sigma = I``.
``disk``
    ``n = 2`` polar mesh in the graph chart, ``r_i = (i + 1/2) dr`` with
    ``dr = sinh(rho_max) / N`` and ``theta_j = j dtheta``.  Tensors use the
    Cartesian chart components ``y = (r cos theta, r sin theta)``.  Radial
    derivatives are second-order central differences; angular derivatives
    are Fourier (spectral) differences on the periodic circle, which are exact
    for the low angular modes that linear and quadratic chart functions carry.

Both layouts carry one ghost layer at each radial end.  The outer ghost
mirrors its neighbour (zero conormal derivative at the cell face on the
boundary); the inner ghost mirrors across the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import base_geometry as bg
from .errors import ConfigError
from .graph_geometry import GraphPointData

MODES = ("radial", "disk")
MIN_CELLS = 16


@dataclass(eq=False)
class Grid:
    mode: str
    n: int
    rho_max: float
    cells: int
    cells_theta: int | None = None
    spacing: tuple = field(init=False)
    quad_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N = self.cells
        if self.mode == "radial":
            h = self.rho_max / N
            self.spacing = (h,)
            self.rho = (np.arange(N) + 0.5) * h
            self.coth = 1.0 / np.tanh(self.rho)
            sphere = 2.0 * math.pi ** (self.n / 2) / math.gamma(self.n / 2)
            self.quad_weights = sphere * np.sinh(self.rho) ** (self.n - 1) * h
            self.sigma = np.broadcast_to(np.eye(self.n), (N, self.n, self.n))
            self.sigma_inv = self.sigma
            self.y = None
        else:
            M = self.cells_theta
            y_max = math.sinh(self.rho_max)
            dr = y_max / N
            dtheta = 2.0 * math.pi / M
            self.spacing = (dr, dtheta)
            self.dtheta1, self.dtheta2 = spectral_matrices(M)
            self.r = (np.arange(N) + 0.5) * dr
            self.theta = np.arange(M) * dtheta
            R, T = np.meshgrid(self.r, self.theta, indexing="ij")
            self.cos, self.sin = np.cos(T), np.sin(T)
            self.r2d = R
            self.y = np.stack([R * self.cos, R * self.sin], axis=-1)
            self.rho = np.arcsinh(R)
            m = bg.metric_sigma(self.y)
            self.sigma, self.sigma_inv = m.sigma, m.sigma_inv
            self.quad_weights = R * dr * dtheta * m.sqrt_det_sigma

    @property
    def interior_shape(self):
        if self.mode == "radial":
            return (self.cells,)
        return (self.cells, self.cells_theta)

    @property
    def h_min(self):
        """Smallest mesh length in the grid's own coordinates.

        For the spectral angular direction the effective length is the ``l``
        with ``4 / l^2`` equal to the largest eigenvalue of ``-D_theta^2``,
        taken on the innermost ring.
        """
        if self.mode == "radial":
            return self.spacing[0]
        dr = self.spacing[0]
        top = np.max(np.linalg.eigvalsh(-self.dtheta2))
        return min(dr, self.r[0] * 2.0 / math.sqrt(top))

    @property
    def cap_area(self):
        """Quadrature of 1, i.e. the discrete area of the base cap."""
        return float(np.sum(self.quad_weights))

    def coordinates(self):
        """Column name to per-node coordinate array, for snapshots."""
        if self.mode == "radial":
            return {"rho": self.rho}
        return {"r": self.r2d, "theta": np.broadcast_to(self.theta, self.interior_shape)}


def spectral_matrices(M):
    """Periodic Fourier differentiation matrices on ``theta_j = 2 pi j / M``, M even.

    Returns ``(D1, D2)`` with ``(D1 f)_j`` approximating ``f'(theta_j)``.
    """
    h = 2.0 * math.pi / M
    k = np.arange(M)
    diff = (k[:, None] - k[None, :]) % M
    sign = np.where(diff % 2 == 0, 1.0, -1.0)
    off = diff != 0
    half = np.where(off, diff * h / 2.0, 1.0)
    D1 = np.where(off, 0.5 * sign / np.tan(half), 0.0)
    D2 = np.where(off, -0.5 * sign / np.sin(half) ** 2, 0.0)
    # diagonals as negative row sums, so constants are annihilated to round-off;
    # for D2 this equals -pi^2 / (3 h^2) - 1/6
    D1[k, k] = -D1.sum(axis=1)
    D2[k, k] = -D2.sum(axis=1)
    return D1, D2


def build_grid(mode="radial", n=2, rho_max=1.0, cells=256, cells_theta=16) -> Grid:
    if mode not in MODES:
        raise ConfigError(f"unknown grid mode {mode!r}; expected one of {MODES}")
    if int(n) != n or n < 2:
        raise ConfigError(f"dimension n must be an integer >= 2, got {n}")
    if mode == "disk" and n != 2:
        raise ConfigError("disk mode supports n = 2 only")
    if not rho_max > 0:
        raise ConfigError(f"rho_max must be positive, got {rho_max}")
    if int(cells) != cells or cells < MIN_CELLS:
        raise ConfigError(f"cells must be an integer >= {MIN_CELLS}, got {cells}")
    if mode == "disk":
        if int(cells_theta) != cells_theta or cells_theta < 4 or cells_theta % 2:
            raise ConfigError(
                f"cells_theta must be an even integer >= 4, got {cells_theta}")
        return Grid("disk", 2, float(rho_max), int(cells), int(cells_theta))
    return Grid("radial", int(n), float(rho_max), int(cells))


@dataclass(eq=False)
class Field:
    """Per-node values including one ghost layer at each radial end."""

    values: np.ndarray
    grid: Grid

    @classmethod
    def from_interior(cls, grid, interior):
        interior = np.asarray(interior, dtype=float)
        if interior.shape != grid.interior_shape:
            raise ValueError(f"expected shape {grid.interior_shape}, got {interior.shape}")
        values = np.empty((interior.shape[0] + 2,) + interior.shape[1:])
        values[1:-1] = interior
        return fill_neumann_ghosts(cls(values, grid))

    @property
    def interior(self):
        return self.values[1:-1]


def fill_neumann_ghosts(f: Field) -> Field:
    vals = f.values
    vals[-1] = vals[-2]
    if f.grid.mode == "radial":
        vals[0] = vals[1]
    else:
        vals[0] = np.roll(vals[1], f.grid.cells_theta // 2)
    return f


def polar_partials(f: Field):
    """Disk-mode partials in (r, theta): f_r, f_t, f_rr, f_tt, f_rt."""
    g = f.grid
    dr = g.spacing[0]
    v = f.values
    c = v[1:-1]
    up, dn = v[2:], v[:-2]
    f_r = (up - dn) / (2 * dr)
    f_rr = (up - 2 * c + dn) / dr ** 2
    f_t = angular(g.dtheta1, c)
    f_tt = angular(g.dtheta2, c)
    f_rt = angular(g.dtheta1, f_r)
    return f_r, f_t, f_rr, f_tt, f_rt


def angular(D, f):
    """``sum_k D_jk (f_k - f_j)`` along the last axis.

    Equal to ``D f`` because the rows of ``D`` sum to zero, but exact on
    constants, which matters once the result is divided by ``r^2``.
    """
    return np.einsum("jk,...jk->...j", D, f[..., None, :] - f[..., :, None])


def d1(f: Field):
    """First partials: ``f_rho`` (radial) or Cartesian chart gradient (disk)."""
    g = f.grid
    if g.mode == "radial":
        v = f.values
        return (v[2:] - v[:-2]) / (2 * g.spacing[0])
    f_r, f_t, *_ = polar_partials(f)
    r = g.r2d
    return np.stack([g.cos * f_r - g.sin * f_t / r,
                     g.sin * f_r + g.cos * f_t / r], axis=-1)


def d2(f: Field):
    """Second partials: ``f_rho_rho`` (radial) or Cartesian chart Hessian (disk)."""
    g = f.grid
    if g.mode == "radial":
        v = f.values
        return (v[2:] - 2 * v[1:-1] + v[:-2]) / g.spacing[0] ** 2
    f_r, f_t, f_rr, f_tt, f_rt = polar_partials(f)
    c, s, r = g.cos, g.sin, g.r2d
    fxx = (c * c * f_rr - 2 * s * c * f_rt / r + s * s * f_tt / r ** 2
           + s * s * f_r / r + 2 * s * c * f_t / r ** 2)
    fyy = (s * s * f_rr + 2 * s * c * f_rt / r + c * c * f_tt / r ** 2
           + c * c * f_r / r - 2 * s * c * f_t / r ** 2)
    fxy = (s * c * f_rr + (c * c - s * s) * f_rt / r - s * c * f_tt / r ** 2
           - s * c * f_r / r - (c * c - s * s) * f_t / r ** 2)
    out = np.empty(fxx.shape + (2, 2))
    out[..., 0, 0] = fxx
    out[..., 1, 1] = fyy
    out[..., 0, 1] = out[..., 1, 0] = fxy
    return out


def covariant_gradient(f: Field):
    """``D f`` in the grid's tensor basis, shape (..., n)."""
    g = f.grid
    if g.mode == "radial":
        out = np.zeros((g.cells, g.n))
        out[:, 0] = d1(f)
        return out
    return d1(f)


def covariant_hessian(f: Field):
    """``f_ij = d_i d_j f - Gamma^k_ij d_k f`` in the grid's tensor basis.

    Radial grids use the geodesic-polar frame, where a rotationally symmetric
    function has ``D^2 f = diag(f_rho_rho, coth(rho) f_rho, ...)``.  On the
    chart the Christoffel symbols ``-y^k sigma_ij`` turn the correction into
    ``(y . d f) sigma_ij``.
    """
    g = f.grid
    if g.mode == "radial":
        f_rho = d1(f)
        out = np.zeros((g.cells, g.n, g.n))
        out[:, 0, 0] = d2(f)
        idx = np.arange(1, g.n)
        out[:, idx, idx] = (g.coth * f_rho)[:, None]
        return out
    grad = d1(f)
    radial = np.einsum("...k,...k->...", g.y, grad)
    return d2(f) + radial[..., None, None] * g.sigma


def covariant_laplacian(f: Field):
    return np.einsum("...ij,...ij->...", f.grid.sigma_inv, covariant_hessian(f))


def point_data(grid: Grid, u) -> GraphPointData:
    """Stencil derivatives of the interior field ``u`` packaged for geometry."""
    f = Field.from_interior(grid, u)
    return GraphPointData(u=f.interior.copy(), du=covariant_gradient(f),
                          hess_u=covariant_hessian(f), y=grid.y,
                          sigma=grid.sigma, sigma_inv=grid.sigma_inv)


def sample_radial(grid: Grid, values, rho):
    """Cubic-spline evaluation of a radial-grid field at geodesic radii ``rho``.

    The field is extended evenly across the pole and the boundary before
    fitting, matching the ghost conventions.
    """
    from scipy.interpolate import CubicSpline

    if grid.mode != "radial":
        raise ValueError("sample_radial needs a radial grid")
    vals = np.asarray(values, dtype=float)
    x = np.concatenate([-grid.rho[::-1], grid.rho, 2 * grid.rho_max - grid.rho[::-1]])
    yv = np.concatenate([vals[::-1], vals, vals[::-1]])
    return CubicSpline(x, yv)(rho)
