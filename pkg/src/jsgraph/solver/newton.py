"""Damped Newton iteration with Armijo backtracking."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import NewtonStallError, NumericError, SingularSystemError
from ..metric import EUCLIDEAN
from .assembly import assemble_jacobian, assemble_residual, stiffness_matrix
from .problem import SolverConfig, Solution


def _linear_solve(J, rhs):
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(J, rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise SingularSystemError(f"singular Newton system: {exc}") from None
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("Newton system produced non-finite values")
    return x


def laplace_guess(mesh, data):
    """Harmonic extension of the boundary data (P1 Laplace solve)."""
    K = stiffness_matrix(mesh).tocsr()
    I = mesh.interior_nodes
    B = mesh.boundary_nodes
    u = data.apply(mesh, np.zeros(mesh.n_vertices))
    if len(I):
        rhs = -(K[I][:, B] @ u[B])
        u[I] = _linear_solve(K[I][:, I].tocsc(), rhs)
    return u


def newton_solve(mesh, data, kind, config=None, metric=EUCLIDEAN, initial=None):
    """Solve the Dirichlet problem for ``kind`` with boundary values ``data``.

    Starts from ``initial`` (boundary reset to the data) or the harmonic
    extension.  Returns a :class:`Solution`; it is flagged non-converged when
    the iteration budget runs out.  A line-search stall raises
    :class:`NewtonStallError` carrying the last iterate.
    """
    config = config or SolverConfig()
    I = mesh.interior_nodes
    u = laplace_guess(mesh, data) if initial is None else data.apply(mesh, initial)
    R = assemble_residual(mesh, metric, u, kind)
    norm = float(np.linalg.norm(R))
    tol = max(config.rtol * norm, config.atol)
    history = [norm]
    it = 0
    while norm > tol and it < config.max_iter:
        J = assemble_jacobian(mesh, metric, u, kind)
        du = _linear_solve(J, -R)
        t = 1.0
        phi0 = 0.5 * norm * norm
        while True:
            trial = u.copy()
            trial[I] += t * du
            try:
                R_t = assemble_residual(mesh, metric, trial, kind)
                phi = 0.5 * float(R_t @ R_t)
            except NumericError:
                phi = np.inf
            # the Newton direction has directional derivative -2 phi0
            if phi <= (1.0 - 2.0 * config.armijo * t) * phi0:
                break
            t *= 0.5
            if t < config.min_step:
                raise NewtonStallError(
                    f"line search stalled at iteration {it + 1} (residual {norm:.3e})",
                    iterate=u, residual_norm=norm, iterations=it,
                )
        u, R = trial, R_t
        norm = float(np.sqrt(2.0 * phi))
        history.append(norm)
        it += 1
    return Solution(
        mesh=mesh,
        u=u,
        kind=kind,
        cap=data.cap,
        residual_norm=norm,
        iterations=it,
        converged=bool(norm <= tol),
        tolerance=tol,
        metric=metric,
        history=tuple(history),
    )
