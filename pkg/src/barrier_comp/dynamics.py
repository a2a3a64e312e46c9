"""Control-affine dynamics ``xdot = f(x) + g(x) u`` and Lie derivatives.

``f`` and ``g`` are assumed locally Lipschitz; nothing here checks it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class Dynamics:
    n: int
    m: int
    f: Callable
    g: Callable

    def drift(self, x) -> np.ndarray:
        return np.asarray(self.f(x), dtype=float).reshape(self.n)

    def input_map(self, x) -> np.ndarray:
        return np.asarray(self.g(x), dtype=float).reshape(self.n, self.m)

    def __call__(self, x, u) -> np.ndarray:
        return self.drift(x) + self.input_map(x) @ np.asarray(u, dtype=float)


@dataclass(frozen=True)
class SingleIntegrator:
    """``xdot = u`` with ``m == n``."""

    n: int = 2

    @property
    def m(self) -> int:
        return self.n

    def drift(self, x) -> np.ndarray:
        return np.zeros(self.n)

    def input_map(self, x) -> np.ndarray:
        return np.eye(self.n)

    def __call__(self, x, u) -> np.ndarray:
        return np.array(u, dtype=float)


@dataclass
class LieDerivatives:
    lfh: float
    lgh: np.ndarray

    def hdot(self, u) -> float:
        return self.lfh + float(self.lgh @ np.asarray(u, dtype=float))


def lie_from_gradient(dyn, gradient, x) -> LieDerivatives:
    gradient = np.asarray(gradient, dtype=float)
    if gradient.shape != (dyn.n,):
        raise DimensionMismatch(f"gradient has shape {gradient.shape}, dynamics state dimension is {dyn.n}")
    return LieDerivatives(float(gradient @ dyn.drift(x)), gradient @ dyn.input_map(x))


def lie_derivatives(dyn, ev, x=None) -> LieDerivatives:
    """``L_f h`` and ``L_g h`` of an evaluated barrier.

    ``ev`` is a :class:`~barrier_comp.compose.BarrierEval`; ``x`` defaults
    to the state it was evaluated at.
    """
    if x is None:
        x = ev.x
    elif ev.x is not None and not np.array_equal(np.asarray(x, dtype=float), ev.x):
        raise ValueError("barrier evaluation was produced at a different state")
    return lie_from_gradient(dyn, ev.gradient, x)


def leaf_lie_derivatives(dyn, leaf_evals, x) -> list:
    """Lie derivatives of each ``(h_i, grad h_i)`` pair."""
    return [lie_from_gradient(dyn, g, x) for _, g in leaf_evals]
