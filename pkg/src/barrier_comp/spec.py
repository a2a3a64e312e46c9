"""Constraint primitives and their Boolean composition.

A safety specification is a tree whose leaves are scalar constraint
functions ``h_i`` (safe where ``h_i(x) >= 0``) and whose internal nodes are
unions (OR) or intersections (AND).  :func:`layerize` normalizes any such
tree into a :class:`LayeredSpec`, the alternating level form that the
smooth composition and the exact oracle both consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union as _TypingUnion

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyChildren,
    NonFiniteValue,
    NonpositiveRadius,
    SpecError,
    ZeroNormal,
)

UNION = "union"
INTERSECTION = "intersection"


def _as_tuple(values) -> tuple:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfSpace:
    """``h(x) = normal . (x - anchor)``."""

    normal: tuple
    anchor: tuple

    def __post_init__(self):
        object.__setattr__(self, "normal", _as_tuple(self.normal))
        object.__setattr__(self, "anchor", _as_tuple(self.anchor))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def check(self) -> list:
        errors = []
        if len(self.anchor) != len(self.normal):
            errors.append(DimensionMismatch(
                f"half-space normal has {len(self.normal)} entries but anchor has {len(self.anchor)}"))
        if not np.linalg.norm(self.normal) > 0:
            errors.append(ZeroNormal("half-space normal must be nonzero"))
        return errors

    def linear_form(self):
        w = np.asarray(self.normal)
        return w, -float(w @ np.asarray(self.anchor))

    def evaluate(self, X: np.ndarray):
        w, c = self.linear_form()
        return X @ w + c, np.broadcast_to(w, X.shape).copy()


@dataclass(frozen=True)
class Affine:
    """``h(x) = coefficients . x + offset``."""

    coefficients: tuple
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_tuple(self.coefficients))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def check(self) -> list:
        return []

    def linear_form(self):
        return np.asarray(self.coefficients), self.offset

    def evaluate(self, X: np.ndarray):
        w, c = self.linear_form()
        return X @ w + c, np.broadcast_to(w, X.shape).copy()


@dataclass(frozen=True)
class Circle:
    """Distance-to-circle barrier.

    ``side="inner"`` keeps the state outside the circle,
    ``h(x) = ||x - center|| - radius``; ``side="outer"`` keeps it inside,
    ``h(x) = -(||x - center|| - radius)``.  At the center itself the
    gradient is undefined and reported as zero.
    """

    center: tuple
    radius: float
    side: str = "inner"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_tuple(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.side not in ("inner", "outer"):
            raise SpecError(f"circle side must be 'inner' or 'outer', got {self.side!r}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def sign(self) -> float:
        return 1.0 if self.side == "inner" else -1.0

    def check(self) -> list:
        if not self.radius > 0:
            return [NonpositiveRadius(f"circle radius must be positive, got {self.radius}")]
        return []

    def evaluate(self, X: np.ndarray):
        d = X - np.asarray(self.center)
        r = np.linalg.norm(d, axis=-1)
        safe_r = np.where(r > 0, r, 1.0)
        grad = self.sign * d / safe_r[..., None]
        return self.sign * (r - self.radius), grad


@dataclass(frozen=True, eq=False)
class Custom:
    """User supplied constraint with an analytic gradient.

    ``value(x) -> float`` and ``gradient(x) -> array of shape (dim,)`` are
    called one state at a time.
    """

    value: Callable
    gradient: Callable
    dim: int
    name: str = "custom"

    def check(self) -> list:
        return []

    def evaluate(self, X: np.ndarray):
        vals = np.array([float(self.value(x)) for x in X])
        grads = np.array([np.asarray(self.gradient(x), dtype=float).reshape(self.dim) for x in X])
        return vals, grads.reshape(X.shape)


BarrierPrimitive = _TypingUnion[HalfSpace, Affine, Circle, Custom]


# ---------------------------------------------------------------------------
# scalings (extended class-K functions applied to a leaf)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    def __call__(self, r):
        return r

    def derivative(self, r):
        return np.ones_like(r)


@dataclass(frozen=True)
class Tanh:
    def __call__(self, r):
        return np.tanh(r)

    def derivative(self, r):
        return 1.0 - np.tanh(r) ** 2


@dataclass(frozen=True, eq=False)
class CustomMonotone:
    """Continuously differentiable, strictly increasing, zero at zero."""

    fn: Callable
    dfn: Callable

    def __call__(self, r):
        return self.fn(r)

    def derivative(self, r):
        return self.dfn(r)


IDENTITY = Identity()


def is_class_k(scaling, grid=None) -> bool:
    """Check ``gamma(0) == 0`` and strict monotonicity on a sample grid."""
    if grid is None:
        grid = np.linspace(-10.0, 10.0, 2001)
    values = np.asarray([scaling(r) for r in grid], dtype=float)
    return abs(float(scaling(0.0))) < 1e-12 and bool(np.all(np.diff(values) > 0))


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    primitive: BarrierPrimitive
    scaling: object = IDENTITY
    negated: bool = False

    def negate(self) -> "Leaf":
        return Leaf(self.primitive, self.scaling, not self.negated)

    @property
    def dim(self) -> int:
        return self.primitive.dim


@dataclass(frozen=True)
class Union:
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    kind = UNION


@dataclass(frozen=True)
class Intersection:
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    kind = INTERSECTION


SpecNode = _TypingUnion[Leaf, Union, Intersection]


def union(*nodes) -> Union:
    return Union(tuple(_wrap(n) for n in nodes))


def intersection(*nodes) -> Intersection:
    return Intersection(tuple(_wrap(n) for n in nodes))


def _wrap(node):
    if isinstance(node, (Leaf, Union, Intersection)):
        return node
    return Leaf(node)


@dataclass
class ValidationReport:
    dim: int | None
    n_leaves: int
    depth: int
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self):
        if self.errors:
            raise self.errors[0]


def validate(tree) -> ValidationReport:
    """Collect every structural violation in ``tree`` without raising."""
    errors = []
    dims = []

    def walk(node, path):
        if isinstance(node, Leaf):
            for err in node.primitive.check():
                err.args = (f"{path}: {err.args[0]}",)
                errors.append(err)
            dims.append((node.dim, path))
            return 1, 0
        if not isinstance(node, (Union, Intersection)):
            errors.append(SpecError(f"{path}: unknown node type {type(node).__name__}"))
            return 0, 0
        if not node.children:
            errors.append(EmptyChildren(f"{path}: {node.kind} has no children"))
            return 0, 1
        count, depth = 0, 0
        for i, child in enumerate(node.children):
            c, d = walk(child, f"{path}.children[{i}]")
            count += c
            depth = max(depth, d)
        return count, depth + 1

    n_leaves, depth = walk(tree, "root")
    distinct = sorted({d for d, _ in dims})
    if len(distinct) > 1:
        errors.append(DimensionMismatch(f"leaves disagree on state dimension: {distinct}"))
    dim = distinct[0] if len(distinct) == 1 else None
    return ValidationReport(dim=dim, n_leaves=n_leaves, depth=depth, errors=errors)


# ---------------------------------------------------------------------------
# layered form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Level:
    kind: str
    groups: tuple

    def __post_init__(self):
        if self.kind not in (UNION, INTERSECTION):
            raise SpecError(f"level kind must be union or intersection, got {self.kind!r}")
        object.__setattr__(self, "groups", tuple(tuple(int(j) for j in g) for g in self.groups))

    @property
    def fan_in(self) -> int:
        return max(len(g) for g in self.groups)

    @cached_property
    def plan(self):
        """Flat gather indices and segment starts for ``np.ufunc.reduceat``."""
        sizes = [len(g) for g in self.groups]
        gather = np.fromiter((j for g in self.groups for j in g), dtype=np.intp)
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.intp)
        owner = np.repeat(np.arange(len(sizes)), sizes)
        return gather, starts, owner

    @cached_property
    def is_partition(self) -> bool:
        """Every index below is used by exactly one group."""
        gather = self.plan[0]
        return bool(np.array_equal(np.sort(gather), np.arange(gather.size)))


@dataclass(frozen=True)
class LayeredSpec:
    """Leaves plus alternating union/intersection levels.

    ``levels[l].groups[i]`` lists indices into the outputs of the level
    below (the leaves for ``l == 0``).  The last level has a single group.
    """

    leaves: tuple
    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "leaves", tuple(_wrap(l) for l in self.leaves))
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.leaves:
            raise EmptyChildren("layered specification has no leaves")
        if not self.levels:
            raise SpecError("layered specification needs at least one level")
        report = validate(Intersection(self.leaves))
        report.raise_for_errors()
        below = len(self.leaves)
        for ell, level in enumerate(self.levels, start=1):
            if not level.groups:
                raise EmptyChildren(f"level {ell} has no groups")
            for i, g in enumerate(level.groups):
                if not g:
                    raise EmptyChildren(f"group {i} at level {ell} is empty")
                if min(g) < 0 or max(g) >= below:
                    raise SpecError(f"group {i} at level {ell} references an index outside 0..{below - 1}")
            below = len(level.groups)
        if below != 1:
            raise SpecError(f"terminal level must have exactly one group, has {below}")

    @property
    def dim(self) -> int:
        return self.leaves[0].dim

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def level_sizes(self) -> list:
        return [len(level.groups) for level in self.levels]

    @property
    def fan_ins(self) -> list:
        return [level.fan_in for level in self.levels]

    @cached_property
    def _compiled(self):
        return _CompiledLeaves(self.leaves)

    def leaf_values(self, X):
        """Vectorized leaf evaluation.

        ``X`` has shape ``(P, n)``.  Returns values ``(N, P)`` and gradients
        ``(N, P, n)`` with negation and scaling applied.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected states of dimension {self.dim}, got shape {X.shape}")
        vals, grads = self._compiled(X)
        if not (np.isfinite(vals).all() and np.isfinite(grads).all()):
            bad = int(np.argwhere(~np.isfinite(vals).all(axis=1) | ~np.isfinite(grads).all(axis=(1, 2)))[0, 0])
            raise NonFiniteValue(f"leaf {bad} returned a non-finite value or gradient")
        return vals, grads


class _CompiledLeaves:
    """Evaluates all leaves with as few numpy calls as possible."""

    def __init__(self, leaves: Sequence[Leaf]):
        n = leaves[0].dim
        self.N = len(leaves)
        self.n = n
        lin_idx, lin_w, lin_c = [], [], []
        circ_idx, circ_c, circ_r, circ_s = [], [], [], []
        self.other = []
        for i, leaf in enumerate(leaves):
            prim = leaf.primitive
            if isinstance(prim, (HalfSpace, Affine)):
                w, c = prim.linear_form()
                lin_idx.append(i)
                lin_w.append(w)
                lin_c.append(c)
            elif isinstance(prim, Circle):
                circ_idx.append(i)
                circ_c.append(prim.center)
                circ_r.append(prim.radius)
                circ_s.append(prim.sign)
            else:
                self.other.append((i, prim))
        self.lin_idx = np.array(lin_idx, dtype=np.intp)
        self.lin_w = np.array(lin_w, dtype=float).reshape(-1, n)
        self.lin_c = np.array(lin_c, dtype=float)
        self.circ_idx = np.array(circ_idx, dtype=np.intp)
        self.circ_c = np.array(circ_c, dtype=float).reshape(-1, n)
        self.circ_r = np.array(circ_r, dtype=float)
        self.circ_s = np.array(circ_s, dtype=float)
        self.sign = np.array([-1.0 if leaf.negated else 1.0 for leaf in leaves])
        self.negated = bool(np.any(self.sign < 0))
        self.scaled = [(i, leaf.scaling) for i, leaf in enumerate(leaves) if not isinstance(leaf.scaling, Identity)]

    def __call__(self, X):
        P = X.shape[0]
        vals = np.empty((self.N, P))
        grads = np.empty((self.N, P, self.n))
        if self.lin_idx.size:
            vals[self.lin_idx] = self.lin_w @ X.T + self.lin_c[:, None]
            grads[self.lin_idx] = self.lin_w[:, None, :]
        if self.circ_idx.size:
            d = X[None, :, :] - self.circ_c[:, None, :]
            r = np.sqrt(np.einsum("kpi,kpi->kp", d, d))
            safe_r = np.where(r > 0, r, 1.0)
            vals[self.circ_idx] = self.circ_s[:, None] * (r - self.circ_r[:, None])
            grads[self.circ_idx] = self.circ_s[:, None, None] * d / safe_r[..., None]
        for i, prim in self.other:
            v, g = prim.evaluate(X)
            vals[i] = v
            grads[i] = g
        if self.negated:
            vals *= self.sign[:, None]
            grads *= self.sign[:, None, None]
        for i, gamma in self.scaled:
            r = vals[i]
            grads[i] = grads[i] * np.asarray(gamma.derivative(r))[:, None]
            vals[i] = gamma(r)
        return vals, grads


def leaf_eval(spec: LayeredSpec, x) -> list:
    """Per-leaf ``(h_i(x), grad h_i(x))`` at a single state."""
    vals, grads = spec.leaf_values(np.atleast_2d(np.asarray(x, dtype=float)))
    return [(float(vals[i, 0]), grads[i, 0].copy()) for i in range(spec.n_leaves)]


def _flatten(node):
    """Merge directly nested nodes of the same kind (value preserving)."""
    if isinstance(node, Leaf):
        return node
    merged = []
    for child in node.children:
        child = _flatten(child)
        if type(child) is type(node):
            merged.extend(child.children)
        else:
            merged.append(child)
    return type(node)(tuple(merged))


def _height(node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_height(c) for c in node.children)


def layerize(tree) -> LayeredSpec:
    """Normalize an arbitrary specification tree to layered form.

    Nested same-kind nodes are merged, internal nodes are placed on the
    level given by their distance from the root, and leaves that sit above
    level 0 are carried up through singleton pass-through groups.
    """
    tree = _wrap(tree)
    validate(tree).raise_for_errors()
    tree = _flatten(tree)
    if isinstance(tree, Leaf):
        return LayeredSpec((tree,), (Level(UNION, ((0,),)),))

    M = _height(tree)
    leaves = []
    groups = [[] for _ in range(M + 1)]
    kinds = [None] * (M + 1)

    def build(node, level):
        if isinstance(node, Leaf):
            leaves.append(node)
            slot = len(leaves) - 1
            for ell in range(1, level + 1):
                groups[ell].append((slot,))
                slot = len(groups[ell]) - 1
            return slot
        kinds[level] = node.kind
        members = tuple(build(child, level - 1) for child in node.children)
        groups[level].append(members)
        return len(groups[level]) - 1

    build(tree, M)
    levels = tuple(Level(kinds[ell], tuple(groups[ell])) for ell in range(1, M + 1))
    return LayeredSpec(tuple(leaves), levels)
