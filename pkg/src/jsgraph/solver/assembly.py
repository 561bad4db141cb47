"""Piecewise-linear weak form of ``div(grad u / W) = F`` and its Jacobian.

In conformal coordinates the equation reads ``div_e(grad_e u / W) =
lambda^2 F`` with ``W = sqrt(1 + |grad_e u|^2 / lambda^2)``, so the residual
at node ``i`` is

    R_i = sum_T A_T (g_T . G_i) / W_T + A_T lambda_T^2 F_T / 3

with ``g_T`` the constant gradient on triangle ``T``, ``G_i`` the gradient of
the hat function and ``lambda_T`` taken at the centroid.
"""

from __future__ import annotations

import json
import weakref

import numpy as np
import scipy.sparse as sp

from ..errors import NumericError
from ..metric import EUCLIDEAN

_CACHE = weakref.WeakKeyDictionary()


class FEMSpace:
    """Per-mesh geometric data reused by every assembly call."""

    def __init__(self, mesh, metric=EUCLIDEAN):
        self.mesh = mesh
        self.metric = metric
        p = mesh.vertices[mesh.triangles]
        self.area = 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        if np.any(self.area <= 0):
            raise NumericError("mesh has non-positive triangle areas")
        G = np.empty((len(p), 3, 2))
        for k in range(3):
            a, b = p[:, (k + 1) % 3], p[:, (k + 2) % 3]
            G[:, k, 0] = (a[:, 1] - b[:, 1]) / (2 * self.area)
            G[:, k, 1] = (b[:, 0] - a[:, 0]) / (2 * self.area)
        self.G = G
        self.lam2 = metric.lam(p.mean(axis=1)) ** 2
        self.tri = mesh.triangles
        self.interior = mesh.interior_nodes
        self.n = mesh.n_vertices
        self.rows = np.repeat(self.tri, 3, axis=1).ravel()
        self.cols = np.tile(self.tri, (1, 3)).ravel()

    def gradients(self, u):
        return np.einsum("tk,tkd->td", u[self.tri], self.G)


def fem_space(mesh, metric=EUCLIDEAN):
    per_mesh = _CACHE.setdefault(mesh, {})
    key = json.dumps(metric.to_json(), sort_keys=True)
    if key not in per_mesh:
        per_mesh[key] = FEMSpace(mesh, metric)
    return per_mesh[key]


def _check_finite(u):
    bad = np.flatnonzero(~np.isfinite(u))
    if len(bad):
        raise NumericError(f"non-finite nodal value at node {int(bad[0])}")


def _fields(space, u, kind):
    g = space.gradients(u)
    q = np.einsum("td,td->t", g, g) / space.lam2
    W = np.sqrt(1.0 + q)
    if kind.name == "minimal":
        F = np.zeros_like(W)
    elif kind.name == "cmc":
        F = np.full_like(W, kind.H0)
    else:
        F = kind.c / W
    return g, W, F


def assemble_residual(mesh, metric, u, kind, full=False):
    """Residual over interior nodes (all nodes when ``full``)."""
    u = np.asarray(u, dtype=float)
    _check_finite(u)
    space = fem_space(mesh, metric)
    g, W, F = _fields(space, u, kind)
    gG = np.einsum("td,tkd->tk", g, space.G)
    local = space.area[:, None] * gG / W[:, None] + (space.area * space.lam2 * F / 3.0)[:, None]
    R = np.bincount(space.tri.ravel(), weights=local.ravel(), minlength=space.n)
    if not np.all(np.isfinite(R)):
        raise NumericError("residual is not finite")
    return R if full else R[space.interior]


def assemble_jacobian(mesh, metric, u, kind, full=False):
    """Exact derivative of :func:`assemble_residual` with respect to the
    interior nodal values (all nodes when ``full``), as CSR."""
    u = np.asarray(u, dtype=float)
    _check_finite(u)
    space = fem_space(mesh, metric)
    g, W, _ = _fields(space, u, kind)
    A = space.area
    G = space.G
    gG = np.einsum("td,tkd->tk", g, G)
    GG = np.einsum("tkd,tld->tkl", G, G)
    lam2 = space.lam2
    local = A[:, None, None] * (
        GG / W[:, None, None] - gG[:, :, None] * gG[:, None, :] / (lam2 * W**3)[:, None, None]
    )
    if kind.name == "translator":
        # d/du_l of A lam^2 (c/W)/3 is the same for every row k
        local -= (A * kind.c / (3.0 * W**3))[:, None, None] * gG[:, None, :]
    J = sp.csr_matrix((local.ravel(), (space.rows, space.cols)), shape=(space.n, space.n))
    J.sum_duplicates()
    if full:
        return J
    idx = space.interior
    return J[idx][:, idx].tocsc()


def stiffness_matrix(mesh):
    """Standard P1 stiffness matrix (all nodes)."""
    from .problem import ProblemKind

    return assemble_jacobian(mesh, EUCLIDEAN, np.zeros(mesh.n_vertices), ProblemKind.minimal(), full=True)
