"""Small dense solvers behind the multi-constraint safety filter.

:func:`min_distance_qp` projects a point onto ``{u : A u >= b}`` with the
dual active-set method of Goldfarb and Idnani specialised to an identity
Hessian.  It starts from the unconstrained optimum, adds the most violated
constraint at a time, and detects infeasibility without a separate
phase-1 problem.

:func:`lp_feasibility` decides the same question independently through
two linear programs solved with HiGHS, returning either a witness input or
a Farkas certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible, MaxIterations


def _normalize_certificate(lam):
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    top = lam.max()
    return lam / top if top > 0 else lam


def min_distance_qp(A, b, u_des, tol=1e-12, max_iter=None):
    """Solve ``min ||u - u_des||^2  s.t.  A u >= b``.

    Returns ``(u, active, multipliers)``.  Raises :class:`Infeasible` with a
    Farkas certificate when the constraints are inconsistent and
    :class:`MaxIterations` if the active set keeps cycling.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    u = np.array(u_des, dtype=float).reshape(-1)
    N, m = A.shape if A.size else (0, u.size)
    if N == 0:
        return u, [], np.zeros(0)
    row_norm = np.linalg.norm(A, axis=1)
    row_norm[row_norm == 0] = 1.0
    if max_iter is None:
        max_iter = 50 * (N + m) + 100

    active: list = []
    lam = np.zeros(0)
    iterations = 0
    while True:
        slack = (A @ u - b) / row_norm
        p = int(np.argmin(slack))
        if slack[p] >= -tol * (1.0 + abs(b[p]) / row_norm[p]):
            return u, active, lam
        n_p = A[p]
        lam_p = 0.0
        while True:
            iterations += 1
            if iterations > max_iter:
                raise MaxIterations(f"active-set QP did not converge in {max_iter} iterations")
            if active:
                Nmat = A[active].T
                r = np.linalg.lstsq(Nmat, n_p, rcond=None)[0]
                z = n_p - Nmat @ r
            else:
                r = np.zeros(0)
                z = n_p
            zz = float(z @ z)
            full_step = zz > 1e-20 * float(n_p @ n_p)

            t1, k = np.inf, -1
            for j, rj in enumerate(r):
                if rj > 1e-14 and lam[j] / rj < t1:
                    t1, k = lam[j] / rj, j
            t2 = -(float(n_p @ u) - b[p]) / zz if full_step else np.inf

            if not np.isfinite(t1) and not full_step:
                cert = np.zeros(N)
                cert[p] = 1.0
                for j, idx in enumerate(active):
                    cert[idx] = -r[j]
                raise Infeasible("constraints admit no common input", _normalize_certificate(cert))

            t = min(t1, t2)
            if full_step:
                u = u + t * z
            lam = lam - t * r
            lam_p += t
            if t2 <= t1:
                active.append(p)
                lam = np.append(lam, lam_p)
                break
            del active[k]
            lam = np.delete(lam, k)


@dataclass
class LPFeasibility:
    feasible: bool
    witness: np.ndarray | None
    certificate: np.ndarray | None
    margin: float


_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def lp_feasibility(A, b, tol=1e-9) -> LPFeasibility:
    """Decide whether ``A u >= b`` has a solution.

    The first LP maximizes a uniform margin ``s <= 1`` with
    ``A u >= b + s``; a nonnegative optimum gives the witness.  Otherwise
    the second LP finds ``lam >= 0`` with ``lam @ A = 0`` maximizing
    ``lam @ b``, which is then positive.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    N, m = A.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A, np.ones((N, 1))])
    bounds = [(None, None)] * m + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=-b, bounds=bounds, method="highs", options=_HIGHS)
    if res.status != 0:
        raise MaxIterations(f"margin LP failed: {res.message}")
    margin = float(res.x[-1])
    if margin >= -tol:
        return LPFeasibility(True, res.x[:m].copy(), None, margin)

    A_eq = np.vstack([A.T, np.ones((1, N))])
    b_eq = np.zeros(m + 1)
    b_eq[-1] = 1.0
    cert = linprog(-b, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * N, method="highs", options=_HIGHS)
    if cert.status != 0:
        raise MaxIterations(f"certificate LP failed: {cert.message}")
    lam = _polish_certificate(A, cert.x)
    return LPFeasibility(False, None, _normalize_certificate(lam), margin)


def _polish_certificate(A, lam):
    """Project the support of ``lam`` onto ``{lam : lam @ A = 0}``."""
    lam = np.clip(lam, 0.0, None)
    support = lam > 1e-12 * max(lam.max(), 1.0)
    As = A[support]
    ls = lam[support]
    if As.size:
        ls = ls - As @ np.linalg.lstsq(As.T @ As, As.T @ ls, rcond=None)[0]
    out = np.zeros_like(lam)
    out[support] = np.clip(ls, 0.0, None)
    return out
