"""Smooth composed barrier via recursive log-sum-exp.

Every node of a :class:`~barrier_comp.spec.LayeredSpec` carries
``log H = kappa * h_node``.  Union levels combine children with
``logsumexp``, intersection levels with ``-logsumexp(-.)``, so nothing is
ever exponentiated outside a shifted sum and large ``kappa * h`` cannot
overflow.  Gradients come from one downward sweep that turns the cached
node logs into per-leaf weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spec import UNION, LayeredSpec


@dataclass(frozen=True)
class CompositionParams:
    kappa: float
    buffer: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "buffer", float(self.buffer))
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")
        if not math.isfinite(self.buffer):
            raise ValueError(f"buffer must be finite, got {self.buffer}")


@dataclass
class BarrierEval:
    """Composed barrier at one state.

    ``leaf_weights`` are the coefficients with
    ``gradient == sum_i leaf_weights[i] * leaf_gradients[i]``;
    ``node_log_values[l]`` holds ``log H`` for every node of level ``l``
    (level 0 being the leaves).
    """

    x: np.ndarray
    value: float
    gradient: np.ndarray
    leaf_weights: np.ndarray
    node_log_values: list
    leaf_values: np.ndarray
    leaf_gradients: np.ndarray
    kappa: float
    buffer: float

    @property
    def raw_value(self) -> float:
        """Value before the buffer shift."""
        return self.value + self.buffer / self.kappa


@dataclass
class BatchEval:
    values: np.ndarray  # (P,)
    gradients: np.ndarray  # (P, n)
    leaf_weights: np.ndarray  # (N, P)
    node_log_values: list  # [(N_l, P)]
    leaf_values: np.ndarray  # (N, P)
    leaf_gradients: np.ndarray  # (N, P, n)


def _segment_logsumexp(vals, starts, owner):
    m = np.maximum.reduceat(vals, starts, axis=0)
    s = np.add.reduceat(np.exp(vals - m[owner]), starts, axis=0)
    return m + np.log(s)


def forward_logs(spec: LayeredSpec, kappa: float, leaf_vals: np.ndarray) -> list:
    """Node logs ``log H`` for all levels, leaves first."""
    logs = [kappa * leaf_vals]
    for level in spec.levels:
        gather, starts, owner = level.plan
        child = logs[-1][gather]
        if level.kind == UNION:
            logs.append(_segment_logsumexp(child, starts, owner))
        else:
            logs.append(-_segment_logsumexp(-child, starts, owner))
    return logs


def backward_weights(spec: LayeredSpec, logs: list) -> np.ndarray:
    """Leaf weights from the root down; each level redistributes its weight."""
    weights = np.ones_like(logs[-1])
    for ell in range(len(spec.levels), 0, -1):
        level = spec.levels[ell - 1]
        gather, _, owner = level.plan
        child = logs[ell - 1][gather]
        parent = logs[ell][owner]
        ratio = np.exp(child - parent) if level.kind == UNION else np.exp(parent - child)
        if level.is_partition and gather.size == logs[ell - 1].shape[0]:
            below = np.empty_like(logs[ell - 1])
            below[gather] = weights[owner] * ratio
        else:
            below = np.zeros_like(logs[ell - 1])
            np.add.at(below, gather, weights[owner] * ratio)
        weights = below
    return weights


def backward_log_weights(spec: LayeredSpec, logs: list) -> np.ndarray:
    """Logarithms of the leaf weights.

    Same sweep as :func:`backward_weights` but kept in the log domain, so
    weights too small for a double (large ``kappa`` times a large gap
    between leaves) still show up as finite log values.
    """
    logw = np.zeros_like(logs[-1])
    for ell in range(len(spec.levels), 0, -1):
        level = spec.levels[ell - 1]
        gather, _, owner = level.plan
        child = logs[ell - 1][gather]
        parent = logs[ell][owner]
        step = child - parent if level.kind == UNION else parent - child
        below = np.full_like(logs[ell - 1], -np.inf)
        np.logaddexp.at(below, gather, logw[owner] + step)
        logw = below
    return logw


def smooth_log_weights(spec: LayeredSpec, params: CompositionParams, x) -> np.ndarray:
    """Log leaf weights of the composed barrier at a single state."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    vals, _ = spec.leaf_values(x)
    return backward_log_weights(spec, forward_logs(spec, params.kappa, vals))[:, 0]


def smooth_eval_batch(spec: LayeredSpec, params: CompositionParams, X) -> BatchEval:
    X = np.asarray(X, dtype=float)
    vals, grads = spec.leaf_values(X)
    logs = forward_logs(spec, params.kappa, vals)
    weights = backward_weights(spec, logs)
    values = (logs[-1][0] - params.buffer) / params.kappa
    gradients = np.einsum("np,npi->pi", weights, grads)
    return BatchEval(values, gradients, weights, logs, vals, grads)


def smooth_eval(spec: LayeredSpec, params: CompositionParams, x) -> BarrierEval:
    """Value, gradient and leaf weights of the composed smooth barrier at ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    b = smooth_eval_batch(spec, params, x[None, :])
    return BarrierEval(
        x=x,
        value=float(b.values[0]),
        gradient=b.gradients[0],
        leaf_weights=b.leaf_weights[:, 0],
        node_log_values=[level[:, 0] for level in b.node_log_values],
        leaf_values=b.leaf_values[:, 0],
        leaf_gradients=b.leaf_gradients[:, 0],
        kappa=params.kappa,
        buffer=params.buffer,
    )


def smooth_max(values, kappa: float) -> float:
    """``(1/kappa) ln sum exp(kappa h_i)``, shifted by the max exponent."""
    v = kappa * np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("smooth_max of an empty list")
    m = v.max()
    return float((m + np.log(np.exp(v - m).sum())) / kappa)


def smooth_min(values, kappa: float) -> float:
    """``-(1/kappa) ln sum exp(-kappa h_i)``."""
    return -smooth_max(-np.asarray(values, dtype=float), kappa)


@dataclass(frozen=True)
class ErrorBoundReport:
    """Interval ``[lower, upper]`` that contains ``h - h_c`` everywhere."""

    fan_ins: tuple
    kinds: tuple
    b_union: float
    b_intersection: float
    kappa: float
    buffer: float

    @property
    def lower(self) -> float:
        return -(self.b_intersection + self.buffer) / self.kappa + 0.0  # no negative zero

    @property
    def upper(self) -> float:
        return (self.b_union - self.buffer) / self.kappa

    @property
    def subset_buffer(self) -> float:
        """Smallest buffer that keeps the smooth safe set inside the exact one."""
        return self.b_union

    @property
    def superset_buffer(self) -> float:
        """Largest buffer that keeps the smooth safe set around the exact one."""
        return -self.b_intersection

    def guarantees(self) -> set:
        out = set()
        if self.buffer >= self.b_union:
            out.add("subset")
        if self.buffer <= -self.b_intersection:
            out.add("superset")
        return out


def error_bounds(spec: LayeredSpec, params: CompositionParams) -> ErrorBoundReport:
    fan_ins = tuple(spec.fan_ins)
    kinds = tuple(level.kind for level in spec.levels)
    b_union = sum(math.log(b) for b, k in zip(fan_ins, kinds) if k == UNION)
    b_inter = sum(math.log(b) for b, k in zip(fan_ins, kinds) if k != UNION)
    return ErrorBoundReport(fan_ins, kinds, b_union, b_inter, params.kappa, params.buffer)
