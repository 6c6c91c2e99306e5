"""Geometry of the unit hyperboloid H^n(1) inside Lorentz-Minkowski space.

Points of H^n(1) are parameterized by the global graph chart

    y in R^n  ->  x(y) = (y, sqrt(1 + |y|^2)),

which is smooth everywhere and maps geodesic balls around the pole
(0, ..., 0, 1) onto round disks ``|y| < sinh(rho)``.  Every function here is
vectorized over leading axes: ``y`` has shape ``(..., n)``.

Closed forms are used for the metric, its inverse and the Christoffel
symbols.  The ``*_fd`` functions rebuild the same objects from finite
differences of the embedding alone and exist to validate the closed forms.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

UNIT_TOL = 1e-12


class MetricSample(NamedTuple):
    sigma: np.ndarray
    sigma_inv: np.ndarray
    sqrt_det_sigma: np.ndarray
    gamma: np.ndarray | None = None


def minkowski_inner(a, b):
    """Lorentzian inner product ``sum_k a_k b_k - a_{n+1} b_{n+1}``.

    The last axis holds the ambient components; leading axes broadcast.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(
            f"ambient dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    if a.shape[-1] < 2:
        raise ValueError("ambient vectors need at least two components")
    return (np.einsum("...k,...k->...", a[..., :-1], b[..., :-1])
            - a[..., -1] * b[..., -1])


def causal_type(a, tol=1e-12):
    """Return 'spacelike', 'timelike' or 'null' for a single ambient vector."""
    q = float(minkowski_inner(a, a))
    if q > tol:
        return "spacelike"
    if q < -tol:
        return "timelike"
    return "null"


def chart_embed(y):
    """Lift chart coordinates onto the hyperboloid, ``(y, sqrt(1+|y|^2))``."""
    y = np.asarray(y, dtype=float)
    s = np.sqrt(1.0 + np.einsum("...i,...i->...", y, y))
    return np.concatenate([y, s[..., None]], axis=-1)


def chart_jacobian(y):
    """Pushed-forward chart fields ``d x / d y_j`` as rows, shape (..., n, n+1)."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    s = np.sqrt(1.0 + np.einsum("...i,...i->...", y, y))
    jac = np.zeros(y.shape[:-1] + (n, n + 1))
    jac[..., :, :n] = np.eye(n)
    jac[..., :, n] = y / s[..., None]
    return jac


def hyperbolic_distance(x1, x2):
    """Geodesic distance of two hyperboloid points, ``arccosh(-<x1, x2>_L)``."""
    return np.arccosh(np.maximum(-minkowski_inner(x1, x2), 1.0))


def polar_lift(rho, omega):
    """Chart point at geodesic distance ``rho`` from the pole along ``omega``.

    ``omega`` must be a Euclidean unit vector; the lifted point is
    ``(sinh(rho) omega, cosh(rho))``.
    """
    omega = np.asarray(omega, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("geodesic radius must be non-negative")
    norm = np.linalg.norm(omega, axis=-1)
    if np.any(np.abs(norm - 1.0) > UNIT_TOL):
        raise ValueError("direction omega must be a unit vector")
    return np.sinh(rho)[..., None] * omega


def metric_sigma(y, with_gamma=False):
    """Hyperbolic metric in the graph chart.

    ``sigma_ij = delta_ij - y_i y_j / (1+|y|^2)``,
    ``sigma^ij = delta_ij + y_i y_j`` and ``det sigma = 1 / (1+|y|^2)``.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    s2 = 1.0 + np.einsum("...i,...i->...", y, y)
    yy = y[..., :, None] * y[..., None, :]
    eye = np.eye(n)
    sigma = eye - yy / s2[..., None, None]
    sigma_inv = eye + yy
    sqrt_det = 1.0 / np.sqrt(s2)
    gamma = christoffel_sigma(y) if with_gamma else None
    return MetricSample(sigma, sigma_inv, sqrt_det, gamma)


def christoffel_sigma(y):
    """Levi-Civita symbols of the chart metric, indexed ``gamma[..., k, i, j]``.

    In the graph chart they reduce to ``Gamma^k_ij = -y^k sigma_ij``.
    """
    y = np.asarray(y, dtype=float)
    sigma = metric_sigma(y).sigma
    return -y[..., :, None, None] * sigma[..., None, :, :]


def conormal(y):
    """sigma-unit outward conormal of the chart circle ``|y| = const``.

    Returned as contravariant chart components.  Rotational symmetry makes it
    radial in ``y``; normalization uses ``sigma(y_hat, y_hat) = 1/(1+|y|^2)``.
    """
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y, axis=-1)
    return y * (np.sqrt(1.0 + r * r) / r)[..., None]


def geodesic_ball_area(rho_max, n):
    """Exact n-volume of a geodesic ball of radius ``rho_max`` in H^n(1)."""
    from scipy.integrate import quad

    sphere = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    val, _ = quad(lambda r: math.sinh(r) ** (n - 1), 0.0, rho_max,
                  epsabs=1e-14, epsrel=1e-13)
    return sphere * val


# --- finite-difference oracles ------------------------------------------------

def _partials(fun, y, h):
    """Central differences of ``fun`` along each chart axis, as a list."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    out = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        out.append((np.asarray(fun(y + e)) - np.asarray(fun(y - e))) / (2 * h))
    return out


def pullback_metric_fd(y, h=1e-5):
    """sigma_ij as ``<d_i x, d_j x>_L`` with central-difference tangents."""
    tangents = np.stack(_partials(chart_embed, y, h), axis=-2)
    return minkowski_inner(tangents[..., :, None, :], tangents[..., None, :, :])


def christoffel_fd(y, h=1e-5):
    """Gamma^k_ij from the textbook formula with differenced ``metric_sigma``."""
    y = np.asarray(y, dtype=float)
    dsig = np.stack(_partials(lambda z: metric_sigma(z).sigma, y, h), axis=-3)
    # dsig[..., l, i, j] = d_l sigma_ij
    sigma_inv = metric_sigma(y).sigma_inv
    n = y.shape[-1]
    first = np.zeros(y.shape[:-1] + (n, n, n))  # [l, i, j], first kind
    for l in range(n):
        for i in range(n):
            for j in range(n):
                first[..., l, i, j] = 0.5 * (dsig[..., i, j, l] + dsig[..., j, i, l]
                                             - dsig[..., l, i, j])
    return np.einsum("...kl,...lij->...kij", sigma_inv, first)


def metric_compatibility_residual(y, h=1e-5):
    """Max of ``|d_k sigma_ij - Gamma^l_ki sigma_lj - Gamma^l_kj sigma_il|``."""
    y = np.asarray(y, dtype=float)
    dsig = np.stack(_partials(lambda z: metric_sigma(z).sigma, y, h), axis=-3)
    sigma = metric_sigma(y).sigma
    gam = christoffel_sigma(y)
    term1 = np.einsum("...lki,...lj->...kij", gam, sigma)
    term2 = np.einsum("...lkj,...il->...kij", gam, sigma)
    return np.max(np.abs(dsig - term1 - term2))


def riemann_fd(y, h=1e-4):
    """Curvature tensor of sigma from differenced Christoffel symbols.

    Uses ``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`` and
    returns ``R_ijml = <R(d_i, d_j) d_l, d_m>``, for which constant curvature
    -1 reads ``sigma_il sigma_jm - sigma_im sigma_jl``.
    """
    y = np.asarray(y, dtype=float)
    dgam = np.stack(_partials(christoffel_sigma, y, h), axis=-4)
    # dgam[..., c, a, d, b] = d_c Gamma^a_db
    gam = christoffel_sigma(y)
    sigma = metric_sigma(y).sigma
    # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    r_up = (np.einsum("...cadb->...abcd", dgam)
            - np.einsum("...dacb->...abcd", dgam)
            + np.einsum("...ace,...edb->...abcd", gam, gam)
            - np.einsum("...ade,...ecb->...abcd", gam, gam))
    # R_ijml = sigma_ma R^a_lij
    return np.einsum("...ma,...alij->...ijml", sigma, r_up)


def constant_curvature_model(y):
    """``sigma_il sigma_jm - sigma_im sigma_jl`` indexed [i, j, m, l]."""
    s = metric_sigma(y).sigma
    return (np.einsum("...il,...jm->...ijml", s, s)
            - np.einsum("...im,...jl->...ijml", s, s))
