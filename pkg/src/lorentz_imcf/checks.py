"""Property suites for the base and graph geometry.

The graph quantities are compared with an independent route: the embedding
``X(y) = u(y) x(y)`` is differentiated numerically in the ambient Minkowski
space and the resulting tangent vectors and second derivatives are paired
with the Lorentz inner product.  Random pointwise data ``(u, Du, D^2 u)`` are
turned into a local quadratic height function so that the embedding can be
sampled around the point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import base_geometry as bg
from . import graph_geometry as gg


@dataclass
class PropertyResult:
    name: str
    error: float
    tol: float

    @property
    def passed(self):
        return bool(self.error <= self.tol)

    def line(self):
        verdict = "pass" if self.passed else "fail"
        return f"{self.name}: {verdict} error={self.error:.3e} tol={self.tol:.1e}"


def random_states(rng, count, n=2, y_max=1.0, max_grad=0.5):
    """Random spacelike point data on the chart with ``|D phi| <= max_grad``."""
    y = rng.normal(size=(count, n))
    y *= (y_max * rng.random(count) ** (1.0 / n) / np.linalg.norm(y, axis=1))[:, None]
    m = bg.metric_sigma(y)
    u = rng.uniform(0.5, 2.5, count)
    a = rng.normal(size=(count, n))
    norm = np.sqrt(np.einsum("ki,kij,kj->k", a, m.sigma_inv, a))
    du = a * (rng.uniform(0.0, max_grad, count) * u / norm)[:, None]
    b = rng.normal(scale=0.5, size=(count, n, n))
    hess = 0.5 * (b + np.swapaxes(b, 1, 2))
    return gg.GraphPointData(u=u, du=du, hess_u=hess, y=y)


def local_height(d: gg.GraphPointData, k):
    """Quadratic ``u(y')`` around node ``k`` reproducing its covariant data.

    Chart partials follow from ``u_ij = d_i d_j u + (y . d u) sigma_ij``.
    """
    y0, u0, du = d.y[k], d.u[k], d.du[k]
    second = d.hess_u[k] - (y0 @ du) * d.sigma[k]

    def u(y):
        s = y - y0
        return u0 + s @ du + 0.5 * np.einsum("...i,ij,...j->...", s, second, s)

    return u


def embedding_fd(d: gg.GraphPointData, k, h=1e-4):
    """Tangents ``X_i`` and covariant second derivatives ``X_,ij`` by differences."""
    height = local_height(d, k)
    y0 = d.y[k]
    n = y0.shape[0]

    def X(y):
        return height(y) * bg.chart_embed(y)

    eye = np.eye(n) * h
    tangents = np.array([(X(y0 + eye[i]) - X(y0 - eye[i])) / (2 * h) for i in range(n)])
    second = np.empty((n, n, n + 1))
    for i in range(n):
        for j in range(n):
            second[i, j] = (X(y0 + eye[i] + eye[j]) - X(y0 + eye[i] - eye[j])
                            - X(y0 - eye[i] + eye[j]) + X(y0 - eye[i] - eye[j])) / (4 * h * h)
    gamma = bg.christoffel_sigma(y0)
    second -= np.einsum("kij,ka->ija", gamma, tangents)
    return tangents, second


def graph_checks(rng, count=200, n=2, fd_samples=40):
    """Embedding cross-checks and algebraic identities of the graph geometry."""
    d = random_states(rng, count, n)
    g, g_inv, area = gg.induced_metric(d)
    h = gg.second_fundamental(d)
    H, shape, a2 = gg.mean_curvature(d)
    nu = gg.graph_normal(d)
    w = gg.support_function(d)
    eye = np.eye(n)

    fd_g = fd_h = fd_nu = 0.0
    for k in range(min(fd_samples, count)):
        tangents, second = embedding_fd(d, k)
        g_fd = bg.minkowski_inner(tangents[:, None, :], tangents[None, :, :])
        h_fd = bg.minkowski_inner(second, nu[k])
        fd_g = max(fd_g, np.max(np.abs(g_fd - g[k])))
        fd_h = max(fd_h, np.max(np.abs(h_fd - h[k])))
        fd_nu = max(fd_nu, np.max(np.abs(bg.minkowski_inner(tangents, nu[k]))))

    inv_err = np.max(np.abs(np.einsum("...ij,...jk->...ik", g, g_inv) - eye))
    det_err = np.max(np.abs(np.sqrt(np.linalg.det(g)) - area))
    trace_err = np.max(np.abs(np.trace(shape, axis1=-2, axis2=-1) - H))
    schwarz = np.max(np.maximum(H ** 2 / n - a2, 0.0))
    past = np.max(np.maximum(nu[..., -1], 0.0))
    return [
        PropertyResult(f"graph n={n}: g g_inv = I", inv_err, 1e-10),
        PropertyResult(f"graph n={n}: area element = sqrt det g", det_err, 1e-10),
        PropertyResult(f"graph n={n}: g vs embedding differences", fd_g, 1e-6),
        PropertyResult(f"graph n={n}: <nu, nu> = -1", np.max(np.abs(bg.minkowski_inner(nu, nu) + 1)), 1e-10),
        PropertyResult(f"graph n={n}: <nu, X_i> = 0", fd_nu, 1e-6),
        PropertyResult(f"graph n={n}: nu past-directed", past, 0.0),
        PropertyResult(f"graph n={n}: h vs embedding differences", fd_h, 1e-5),
        PropertyResult(f"graph n={n}: h symmetric", np.max(np.abs(h - np.swapaxes(h, -1, -2))), 1e-12),
        PropertyResult(f"graph n={n}: trace(g^-1 h) = H", trace_err, 1e-10),
        PropertyResult(f"graph n={n}: |A|^2 >= H^2/n", schwarz, 1e-10),
        PropertyResult(f"graph n={n}: u/v = <X, nu>", np.max(np.abs(gg.support_function_direct(d) - w)), 1e-8),
    ]


def neumann_check(rng, count=100, radius=0.8):
    """Zero conormal derivative makes the pushed-forward conormal orthogonal to nu."""
    d = random_states(rng, count, 2)
    theta = rng.uniform(0, 2 * np.pi, count)
    y = radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    mu = bg.conormal(y)
    m = bg.metric_sigma(y)
    # remove the conormal component of Du
    du = d.du - (np.einsum("ki,ki->k", mu, d.du))[:, None] * np.einsum("kij,kj->ki", m.sigma, mu)
    state = gg.GraphPointData(u=d.u, du=du, hess_u=d.hess_u, y=y)
    nu = gg.graph_normal(state)
    mu_hat = np.einsum("ki,kia->ka", mu, bg.chart_jacobian(y))
    unit = np.max(np.abs(np.einsum("ki,kij,kj->k", mu, m.sigma, mu) - 1.0))
    radial = np.max(np.abs(mu[:, 0] * y[:, 1] - mu[:, 1] * y[:, 0]))
    return [
        PropertyResult("conormal: sigma-unit", unit, 1e-12),
        PropertyResult("conormal: radial in the chart", radial, 1e-12),
        PropertyResult("neumann: <mu, nu> = 0 when D_mu u = 0",
                       np.max(np.abs(bg.minkowski_inner(mu_hat, nu))), 1e-6),
    ]


def base_checks(rng, count=50, n=2):
    """Chart metric, connection and curvature against finite-difference oracles."""
    y = rng.uniform(-1.0, 1.0, size=(count, n))
    m = bg.metric_sigma(y)
    x = bg.chart_embed(y)
    curv = max(np.max(np.abs(bg.riemann_fd(yk) - bg.constant_curvature_model(yk))) for yk in y[:10])
    return [
        PropertyResult(f"base n={n}: <x, x> = -1", np.max(np.abs(bg.minkowski_inner(x, x) + 1)), 1e-12),
        PropertyResult(f"base n={n}: sigma vs pulled-back metric",
                       np.max(np.abs(bg.pullback_metric_fd(y) - m.sigma)), 1e-6),
        PropertyResult(f"base n={n}: sigma sigma^-1 = I",
                       np.max(np.abs(m.sigma @ m.sigma_inv - np.eye(n))), 1e-12),
        PropertyResult(f"base n={n}: Christoffel vs differences",
                       np.max(np.abs(bg.christoffel_fd(y) - bg.christoffel_sigma(y))), 1e-6),
        PropertyResult(f"base n={n}: metric compatibility",
                       float(bg.metric_compatibility_residual(y)), 1e-6),
        PropertyResult(f"base n={n}: constant curvature -1", curv, 1e-4),
    ]


def geometry_check(seed=0, count=200):
    """Run every property suite; returns a list of :class:`PropertyResult`."""
    rng = np.random.default_rng(seed)
    results = []
    for n in (2, 3):
        results += base_checks(rng, n=n)
        results += graph_checks(rng, count, n)
    results += neumann_check(rng)
    return results
