"""Random instance generators and an extended-precision reference shared by the tests."""

from __future__ import annotations

import mpmath
import numpy as np

from barrier_comp.compose import CompositionParams
from barrier_comp.dynamics import Dynamics
from barrier_comp.spec import Circle, HalfSpace, LayeredSpec, Leaf, Level, Tanh

UNION, INTERSECTION = "union", "intersection"


def random_leaf(rng, dim=2, scale=3.0, allow_tanh=False):
    if rng.random() < 0.6:
        normal = rng.normal(size=dim)
        normal /= np.linalg.norm(normal)
        prim = HalfSpace(normal, rng.uniform(-scale, scale, size=dim))
    else:
        side = "inner" if rng.random() < 0.5 else "outer"
        prim = Circle(rng.uniform(-scale, scale, size=dim), rng.uniform(0.3, 2.0), side)
    leaf = Leaf(prim)
    if allow_tanh and rng.random() < 0.2:
        leaf = Leaf(prim, Tanh())
    if rng.random() < 0.15:
        leaf = leaf.negate()
    return leaf


def _split(rng, items, k, overlap=False):
    """Split ``items`` into ``k`` nonempty groups (optionally sharing members)."""
    items = list(items)
    rng.shuffle(items)
    cuts = np.sort(rng.choice(np.arange(1, len(items)), size=k - 1, replace=False)) if k > 1 else []
    groups = [list(g) for g in np.split(np.array(items), cuts)]
    if overlap and len(items) > 1:
        for g in groups:
            if rng.random() < 0.3:
                extra = int(rng.choice(items))
                if extra not in g:
                    g.append(extra)
    return [tuple(sorted(int(j) for j in g)) for g in groups]


def random_layered(rng, max_leaves=16, max_depth=4, dim=2, depth=None, n_leaves=None,
                   first_kind=None, overlap=True, allow_tanh=False):
    """Random layered specification with alternating level kinds."""
    M = int(depth if depth is not None else rng.integers(1, max_depth + 1))
    N = int(n_leaves if n_leaves is not None else rng.integers(1, max_leaves + 1))
    sizes = [N]
    for _ in range(M - 1):
        sizes.append(int(rng.integers(1, sizes[-1] + 1)))
    sizes.append(1)
    kind = first_kind or (UNION if rng.random() < 0.5 else INTERSECTION)
    levels = []
    for ell in range(1, M + 1):
        levels.append(Level(kind, _split(rng, range(sizes[ell - 1]), sizes[ell], overlap)))
        kind = INTERSECTION if kind == UNION else UNION
    leaves = [random_leaf(rng, dim, allow_tanh=allow_tanh) for _ in range(N)]
    return LayeredSpec(tuple(leaves), tuple(levels))


def random_dynamics(rng, n, m):
    F = rng.normal(size=(n, n))
    c = rng.normal(size=n)
    G0 = rng.normal(size=(n, m))
    G1 = rng.normal(size=(n, m)) * 0.3
    return Dynamics(n, m, lambda x: F @ x + c, lambda x: G0 + G1 * np.tanh(x[0]))


def mp_leaf_value(leaf, x):
    """Leaf value in mpmath arithmetic (half-space and circle leaves, no scaling)."""
    prim = leaf.primitive
    if isinstance(prim, HalfSpace):
        r = mpmath.fsum(mpmath.mpf(a) * (xi - mpmath.mpf(p)) for a, xi, p in zip(prim.normal, x, prim.anchor))
    else:
        d = mpmath.sqrt(mpmath.fsum((xi - mpmath.mpf(c)) ** 2 for xi, c in zip(x, prim.center)))
        r = prim.sign * (d - mpmath.mpf(prim.radius))
    return -r if leaf.negated else r


def mp_smooth_value(spec, params: CompositionParams, x):
    """Composed barrier via the direct ``H`` recursion, in extended precision."""
    kappa = mpmath.mpf(params.kappa)
    H = [mpmath.exp(kappa * mp_leaf_value(leaf, x)) for leaf in spec.leaves]
    for level in spec.levels:
        if level.kind == UNION:
            H = [mpmath.fsum(H[j] for j in g) for g in level.groups]
        else:
            H = [1 / mpmath.fsum(1 / H[j] for j in g) for g in level.groups]
    return (mpmath.log(H[0]) - mpmath.mpf(params.buffer)) / kappa


def mp_smooth_gradient(spec, params, x, dps=60):
    with mpmath.workdps(dps):
        xm = [mpmath.mpf(float(v)) for v in x]
        grad = []
        for i in range(len(xm)):
            def fi(t, i=i):
                y = list(xm)
                y[i] = t
                return mp_smooth_value(spec, params, y)
            grad.append(mpmath.diff(fi, xm[i]))
        return grad
