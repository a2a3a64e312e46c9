"""Exact nonsmooth composition (nested max/min) used as ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compose import CompositionParams, error_bounds, smooth_eval_batch
from .spec import UNION, LayeredSpec


@dataclass
class OracleEval:
    value: float
    leaf: int
    path: tuple  # node index per level, root level first, leaves last


def nonsmooth_levels(spec: LayeredSpec, leaf_vals: np.ndarray):
    """Node values and winning child per level for a batch ``(N, P)``."""
    values = [leaf_vals]
    winners = []
    for level in spec.levels:
        below = values[-1]
        out = np.empty((len(level.groups), below.shape[1]))
        arg = np.empty(out.shape, dtype=np.intp)
        pick = np.argmax if level.kind == UNION else np.argmin
        for i, g in enumerate(level.groups):
            block = below[list(g)]
            k = pick(block, axis=0)
            arg[i] = np.asarray(g)[k]
            out[i] = block[k, np.arange(block.shape[1])]
        values.append(out)
        winners.append(arg)
    return values, winners


def nonsmooth_batch(spec: LayeredSpec, X) -> np.ndarray:
    vals, _ = spec.leaf_values(np.asarray(X, dtype=float))
    values, _ = nonsmooth_levels(spec, vals)
    return values[-1][0]


def nonsmooth_eval(spec: LayeredSpec, x) -> OracleEval:
    """Exact layered max/min; ties go to the lowest index."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    vals, _ = spec.leaf_values(x)
    values, winners = nonsmooth_levels(spec, vals)
    node = 0
    path = [0]
    for arg in reversed(winners):
        node = int(arg[node, 0])
        path.append(node)
    return OracleEval(value=float(values[-1][0, 0]), leaf=node, path=tuple(path))


@dataclass
class MembershipGrid:
    axes: list
    points: np.ndarray  # (P, n), first axis varying slowest
    h: np.ndarray  # (P,)
    h_c: np.ndarray  # (P,)
    guarantees: set

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def smooth_only(self) -> int:
        """Cells inside the smooth set but outside the exact set."""
        return int(np.count_nonzero((self.h >= 0) & (self.h_c < 0)))

    @property
    def exact_only(self) -> int:
        """Cells inside the exact set but outside the smooth set."""
        return int(np.count_nonzero((self.h_c >= 0) & (self.h < 0)))

    @property
    def disagreements(self) -> int:
        return self.smooth_only + self.exact_only

    @property
    def violations(self) -> int:
        """Disagreements that contradict an inclusion the buffer guarantees."""
        count = 0
        if "subset" in self.guarantees:
            count += self.smooth_only
        if "superset" in self.guarantees:
            count += self.exact_only
        return count

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name).reshape(self.shape)


def membership_grid(spec: LayeredSpec, params: CompositionParams, box, resolution, chunk=65536) -> MembershipGrid:
    """Sample ``h`` and ``h_c`` on a regular grid over ``box``.

    ``box`` is a sequence of ``(low, high)`` per state coordinate and
    ``resolution`` either an int or one int per coordinate.
    """
    box = [tuple(map(float, b)) for b in box]
    if len(box) != spec.dim:
        raise ValueError(f"box has {len(box)} axes, specification has dimension {spec.dim}")
    res = [int(resolution)] * len(box) if np.isscalar(resolution) else [int(r) for r in resolution]
    if min(res) < 2:
        raise ValueError("resolution must be at least 2 per axis")
    axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, res)]
    points = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    h = np.empty(len(points))
    h_c = np.empty(len(points))
    for s in range(0, len(points), chunk):
        block = points[s:s + chunk]
        b = smooth_eval_batch(spec, params, block)
        h[s:s + chunk] = b.values
        h_c[s:s + chunk] = nonsmooth_levels(spec, b.leaf_values)[0][-1][0]
    return MembershipGrid(axes, points, h, h_c, error_bounds(spec, params).guarantees())
