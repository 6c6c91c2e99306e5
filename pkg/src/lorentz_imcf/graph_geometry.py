"""Pointwise geometry of a spacelike radial graph over H^n(1).

The graph is realized as ``X(y) = u(y) x(y)`` with ``x`` the hyperboloid lift,
so that ``<X, X>_L = -u^2``.  All quantities are tensors with respect to a
frame on the base in which the hyperbolic metric has components ``sigma``;
this is either the graph chart of :mod:`base_geometry` (disk grids) or an
orthonormal geodesic-polar frame with ``sigma = I`` (radial grids).

Inputs are vectorized over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import base_geometry as bg
from .errors import SpacelikeViolation

EPS_SPACELIKE = 1e-10


@dataclass
class GraphPointData:
    """Height, covariant gradient and covariant Hessian of ``u`` at points.

    ``sigma``/``sigma_inv`` default to the chart metric at ``y``.  ``y`` may be
    omitted when an explicit frame metric is given, but then no ambient
    objects (normal, support function) can be formed.
    """

    u: np.ndarray
    du: np.ndarray
    hess_u: np.ndarray
    y: np.ndarray | None = None
    sigma: np.ndarray | None = None
    sigma_inv: np.ndarray | None = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.du = np.asarray(self.du, dtype=float)
        self.hess_u = np.asarray(self.hess_u, dtype=float)
        if np.any(self.u <= 0):
            raise ValueError("graph height u must be positive")
        if self.sigma is None:
            if self.y is None:
                raise ValueError("need either chart points y or a frame metric")
            m = bg.metric_sigma(self.y)
            self.sigma, self.sigma_inv = m.sigma, m.sigma_inv
        elif self.sigma_inv is None:
            self.sigma_inv = np.linalg.inv(self.sigma)

    @property
    def n(self):
        return self.du.shape[-1]

    @property
    def du_up(self):
        return np.einsum("...ij,...j->...i", self.sigma_inv, self.du)

    @property
    def grad_sq(self):
        """``|Du|^2_sigma``."""
        return np.einsum("...i,...i->...", self.du, self.du_up)

    def log_derivatives(self):
        """phi = log u with its covariant gradient and Hessian."""
        u = self.u
        dphi = self.du / u[..., None]
        hphi = (self.hess_u / u[..., None, None]
                - dphi[..., :, None] * dphi[..., None, :])
        return np.log(u), dphi, hphi


@dataclass
class GeometryFields:
    v: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    h: np.ndarray
    shape: np.ndarray
    H: np.ndarray
    a_norm_sq: np.ndarray
    w: np.ndarray | None
    area_element: np.ndarray


def _v_squared(d):
    return 1.0 - d.grad_sq / d.u ** 2


def spacelike_factor(d: GraphPointData, eps=EPS_SPACELIKE):
    """``v = sqrt(1 - u^-2 |Du|^2)``; raises SpacelikeViolation near null."""
    v2 = _v_squared(d)
    if np.any(v2 <= eps):
        bad = np.argmin(v2)
        raise SpacelikeViolation(
            f"1 - |D phi|^2 = {np.min(v2):.3e} <= {eps:g}", worst=float(np.min(v2)),
            index=int(bad))
    return np.sqrt(v2)


def induced_metric(d: GraphPointData, eps=EPS_SPACELIKE):
    """Induced metric, its inverse and the chart area element ``sqrt(det g)``.

    ``g_ij = u^2 sigma_ij - u_i u_j`` and
    ``g^ij = u^-2 (sigma^ij + u^i u^j / (u^2 v^2))``.
    """
    v = spacelike_factor(d, eps)
    u = d.u[..., None, None]
    du = d.du
    up = d.du_up
    g = u ** 2 * d.sigma - du[..., :, None] * du[..., None, :]
    g_inv = (d.sigma_inv + up[..., :, None] * up[..., None, :]
             / (u ** 2 * v[..., None, None] ** 2)) / u ** 2
    # det g = u^(2n) v^2 det sigma
    area = d.u ** d.n * v * np.sqrt(np.linalg.det(d.sigma))
    return g, g_inv, area


def graph_normal(d: GraphPointData, eps=EPS_SPACELIKE):
    """Past-directed timelike unit normal in ambient Minkowski components.

    ``nu = -(1/v) (x + (u^j / u) d_j x)``, which gives ``<nu, x>_L = 1/v > 0``
    and a negative last component.
    """
    if d.y is None:
        raise ValueError("ambient normal needs chart points y")
    v = spacelike_factor(d, eps)
    x = bg.chart_embed(d.y)
    jac = bg.chart_jacobian(d.y)
    tangential = np.einsum("...j,...jk->...k", d.du_up / d.u[..., None], jac)
    return -(x + tangential) / v[..., None]


def second_fundamental(d: GraphPointData, eps=EPS_SPACELIKE):
    """``h_ij = -(1/v) (2 u_i u_j / u - u_ij - u sigma_ij)``."""
    v = spacelike_factor(d, eps)
    u = d.u[..., None, None]
    du = d.du
    return -(2.0 * du[..., :, None] * du[..., None, :] / u - d.hess_u
             - u * d.sigma) / v[..., None, None]


def mean_curvature(d: GraphPointData, eps=EPS_SPACELIKE):
    """Mean curvature, the shape operator and ``|A|^2``.

    H comes from the log form
    ``H = (n + (sigma^ij + phi^i phi^j / v^2) phi_ij) / (u v)``;
    the shape operator ``h^i_j = g^ik h_kj`` is built independently from the
    u-form of the metric and second fundamental form, so its trace is a
    second route to H.
    """
    v = spacelike_factor(d, eps)
    _, dphi, hphi = d.log_derivatives()
    phi_up = np.einsum("...ij,...j->...i", d.sigma_inv, dphi)
    sig_t = d.sigma_inv + phi_up[..., :, None] * phi_up[..., None, :] / v[..., None, None] ** 2
    H = (d.n + np.einsum("...ij,...ij->...", sig_t, hphi)) / (d.u * v)

    _, g_inv, _ = induced_metric(d, eps)
    h = second_fundamental(d, eps)
    shape = np.einsum("...ik,...kj->...ij", g_inv, h)
    a_norm_sq = np.einsum("...ij,...ji->...", shape, shape)
    return H, shape, a_norm_sq


def support_function(d: GraphPointData, eps=EPS_SPACELIKE):
    """``w = <X, nu>_L``, which for a radial graph equals ``u / v``."""
    return d.u / spacelike_factor(d, eps)


def support_function_direct(d: GraphPointData, eps=EPS_SPACELIKE):
    """``<u x(y), nu>_L`` evaluated with ambient vectors."""
    nu = graph_normal(d, eps)
    X = d.u[..., None] * bg.chart_embed(d.y)
    return bg.minkowski_inner(X, nu)


def geometry_fields(d: GraphPointData, eps=EPS_SPACELIKE) -> GeometryFields:
    v = spacelike_factor(d, eps)
    g, g_inv, area = induced_metric(d, eps)
    h = second_fundamental(d, eps)
    H, shape, a2 = mean_curvature(d, eps)
    w = support_function(d, eps)
    return GeometryFields(v=v, g=g, g_inv=g_inv, h=h, shape=shape, H=H,
                          a_norm_sq=a2, w=w, area_element=area)


def total_area(state, grid, eps=EPS_SPACELIKE):
    """Area of the graph of ``state.u`` over the cap, by grid quadrature.

    The weights carry the hyperbolic volume element, so the integrand is
    ``sqrt(det g) / sqrt(det sigma) = u^n v``.
    """
    from .discretization import point_data

    d = point_data(grid, state.u)
    v = spacelike_factor(d, eps)
    return float(np.sum(grid.quad_weights * d.u ** grid.n * v))
