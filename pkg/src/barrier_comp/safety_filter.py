"""Safety filters built on control barrier functions.

The single-constraint filter is the closed form of the minimum-norm QP;
the multi-constraint baseline keeps one constraint per leaf and is solved
by :func:`barrier_comp.qp.min_distance_qp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compose import BarrierEval, CompositionParams, smooth_eval_batch
from .dynamics import LieDerivatives, leaf_lie_derivatives, lie_derivatives
from .qp import lp_feasibility, min_distance_qp

EPS_G = 1e-10

PASS_THROUGH = "pass_through"
INACTIVE = "inactive"
ACTIVE = "active"


@dataclass(frozen=True)
class Linear:
    """``alpha(h) = slope * h``."""

    slope: float = 1.0

    def __post_init__(self):
        if not self.slope > 0:
            raise ValueError(f"alpha slope must be positive, got {self.slope}")
        object.__setattr__(self, "slope", float(self.slope))

    def __call__(self, h):
        return self.slope * h


@dataclass(frozen=True, eq=False)
class CustomKInfty:
    """User supplied extended class-K-infinity function."""

    fn: Callable

    def __call__(self, h):
        return self.fn(h)


def dominating_alpha(alphas) -> Linear:
    """An alpha at least as large as every linear ``alpha_i``."""
    slopes = [a.slope for a in alphas if isinstance(a, Linear)]
    if len(slopes) != len(alphas):
        raise TypeError("a dominating alpha can only be formed from Linear alphas")
    return Linear(max(slopes))


@dataclass
class FilterResult:
    u_safe: np.ndarray
    u_des: np.ndarray
    eta: float
    case: str
    lie: LieDerivatives
    h_value: float
    alpha_h: float

    @property
    def residual(self) -> float:
        """``hdot(x, u_safe) + alpha(h)``; nonnegative when the constraint holds."""
        return self.lie.hdot(self.u_safe) + self.alpha_h


def explicit_input(lfh, lgh, u_des, alpha_h, eps_g=EPS_G):
    """Closed-form minimizer of ``||u - u_des||^2`` s.t. ``lfh + lgh.u >= -alpha_h``.

    Returns ``(u, eta, case)``.
    """
    eta = -lfh - float(lgh @ u_des) - alpha_h
    norm2 = float(lgh @ lgh)
    if norm2 <= eps_g * eps_g:
        return u_des, eta, PASS_THROUGH
    if eta <= 0:
        return u_des, eta, INACTIVE
    return u_des + (eta / norm2) * lgh, eta, ACTIVE


def filter_explicit(dyn, spec_eval: BarrierEval, alpha, u_des, x=None, eps_g: float = EPS_G) -> FilterResult:
    """Minimally modify ``u_des`` so that ``hdot >= -alpha(h)``.

    ``L_g h`` counts as zero when its norm is at most ``eps_g``.
    """
    u_des = np.asarray(u_des, dtype=float).reshape(-1)
    lie = lie_derivatives(dyn, spec_eval, x)
    a_h = float(alpha(spec_eval.value))
    u, eta, case = explicit_input(lie.lfh, lie.lgh, u_des, a_h, eps_g)
    return FilterResult(np.array(u), u_des, eta, case, lie, spec_eval.value, a_h)


def constraint_rows(leaf_lies, leaf_h, alphas):
    """Rows of ``A u >= b`` for per-leaf constraints ``hdot_i >= -alpha_i(h_i)``."""
    if not isinstance(alphas, (list, tuple)):
        alphas = [alphas] * len(leaf_lies)
    A = np.array([lie.lgh for lie in leaf_lies], dtype=float)
    b = np.array([-lie.lfh - float(a(h)) for lie, h, a in zip(leaf_lies, leaf_h, alphas)])
    return A, b


def filter_qp_multi(dyn, leaf_evals, alphas, u_des, x) -> np.ndarray:
    """Baseline filter with one constraint per leaf.

    ``leaf_evals`` is a list of ``(h_i, grad h_i)`` as returned by
    :func:`barrier_comp.spec.leaf_eval`.  Raises
    :class:`~barrier_comp.errors.Infeasible` when no input satisfies every
    constraint.
    """
    lies = leaf_lie_derivatives(dyn, leaf_evals, x)
    A, b = constraint_rows(lies, [h for h, _ in leaf_evals], alphas)
    u, _, _ = min_distance_qp(A, b, u_des)
    return u


@dataclass
class FeasibilityReport:
    feasible: bool
    witness_u: np.ndarray | None
    violating_multipliers: np.ndarray | None
    A: np.ndarray
    b: np.ndarray

    @property
    def certificate_residual(self) -> float:
        """``||lam @ A||`` of the infeasibility certificate."""
        return float(np.linalg.norm(self.violating_multipliers @ self.A))

    @property
    def certificate_gap(self) -> float:
        """``lam @ b``; positive for a valid certificate."""
        return float(self.violating_multipliers @ self.b)


def feasibility_check(leaf_lies, leaf_h, alphas) -> FeasibilityReport:
    """Is there an input meeting every per-leaf constraint at once?

    Infeasible instances come with multipliers ``lam >= 0`` such that
    ``sum lam_i L_g h_i = 0`` while ``sum lam_i (L_f h_i + alpha_i(h_i)) < 0``.
    """
    A, b = constraint_rows(leaf_lies, leaf_h, alphas)
    res = lp_feasibility(A, b)
    return FeasibilityReport(res.feasible, res.witness, res.certificate, A, b)


@dataclass
class Violation:
    x: np.ndarray
    h: float
    lfh: float
    lgh_norm: float
    margin: float  # lfh + alpha(h), negative at a violation


def grid_sampler(box, resolution):
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    return np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)


def random_sampler(box, count, seed=None):
    rng = np.random.default_rng(seed)
    box = np.asarray(box, dtype=float)
    return rng.uniform(box[:, 0], box[:, 1], size=(count, len(box)))


def validity_scan(spec, params: CompositionParams, dyn, alpha, sampler, eps_g: float = 1e-6,
                  eps_v: float = 1e-9) -> list:
    """Sample-based check of the CBF condition for the composed barrier.

    At each sampled state where ``||L_g h|| <= eps_g`` the condition
    ``L_f h + alpha(h) >= -eps_v`` must hold.  ``sampler`` is an array of
    states or a callable returning one.
    """
    X = np.asarray(sampler() if callable(sampler) else sampler, dtype=float)
    batch = smooth_eval_batch(spec, params, X)
    out = []
    for x, h, grad in zip(X, batch.values, batch.gradients):
        lgh = grad @ dyn.input_map(x)
        norm = float(np.linalg.norm(lgh))
        if norm > eps_g:
            continue
        lfh = float(grad @ dyn.drift(x))
        margin = lfh + float(alpha(h))
        if margin < -eps_v:
            out.append(Violation(x.copy(), float(h), lfh, norm, margin))
    return out
