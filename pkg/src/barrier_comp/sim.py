"""Closed-loop simulation with the explicit safety filter.

Integration is fixed-step classical RK4 and the filter is re-evaluated at
every stage, so the closed loop is the continuous feedback
``xdot = f(x) + g(x) k(x)`` rather than a sample-and-hold approximation.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compose import smooth_eval, smooth_eval_batch
from .errors import NonFiniteState, NonFiniteValue
from .oracle import nonsmooth_levels
from .safety_filter import explicit_input, filter_explicit


@dataclass(frozen=True)
class SaturatedProportional:
    """``sat(gain * (target - x))`` with ``sat(u) = min(1, u_max/||u||) u``."""

    gain: float
    target: tuple
    u_max: float

    def __post_init__(self):
        object.__setattr__(self, "gain", float(self.gain))
        object.__setattr__(self, "u_max", float(self.u_max))
        object.__setattr__(self, "target", tuple(float(v) for v in self.target))
        if not (self.gain > 0 and self.u_max > 0):
            raise ValueError("gain and u_max must be positive")

    def __call__(self, x) -> np.ndarray:
        u = self.gain * (np.asarray(self.target) - x)
        norm = np.linalg.norm(u)
        if norm > self.u_max:
            u = u * (self.u_max / norm)
        return u


@dataclass(frozen=True)
class Constant:
    u: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(v) for v in self.u))

    def __call__(self, x) -> np.ndarray:
        return np.array(self.u)


@dataclass(frozen=True, eq=False)
class CustomController:
    fn: Callable

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(x), dtype=float)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    desired_inputs: np.ndarray
    h: np.ndarray
    h_c: np.ndarray
    leaf_values: np.ndarray  # (T, N)
    cases: list
    kappa: float = float("nan")

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def columns(self) -> list:
        n = self.states.shape[1]
        m = self.inputs.shape[1]
        return (["t"] + [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(m)]
                + [f"u_des{i + 1}" for i in range(m)] + ["h", "h_c", "case"])

    def write_csv(self, path, header_comment=None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for k in range(len(self)):
                nums = [self.times[k], *self.states[k], *self.inputs[k], *self.desired_inputs[k],
                        self.h[k], self.h_c[k]]
                w.writerow([repr(float(v)) for v in nums] + [self.cases[k]])


def _closed_loop(scenario, spec, params):
    dyn = scenario.dynamics
    alpha = scenario.alpha
    controller = scenario.controller

    def full(x):
        ev = smooth_eval(spec, params, x)
        res = filter_explicit(dyn, ev, alpha, controller(x), x)
        return dyn(x, res.u_safe), ev, res

    def velocity(x):
        b = smooth_eval_batch(spec, params, x[None, :])
        h, grad = b.values[0], b.gradients[0]
        f, G = dyn.drift(x), dyn.input_map(x)
        u, _, _ = explicit_input(float(grad @ f), grad @ G, controller(x), float(alpha(h)))
        return f + G @ u

    return full, velocity


def simulate(scenario, x0=None, kappa=None) -> Trajectory:
    """Integrate the filtered closed loop from ``x0`` (default: first initial state).

    ``kappa`` overrides the scenario's smoothing parameter.
    """
    if kappa is not None:
        scenario = scenario.with_kappa(kappa)
    spec = scenario.layered
    params = scenario.params
    dt = float(scenario.dt)
    steps = int(round(scenario.horizon / dt))
    if dt <= 0 or steps <= 0:
        raise ValueError("dt and horizon must be positive")
    x = np.array(scenario.init[0] if x0 is None else x0, dtype=float)
    full, velocity = _closed_loop(scenario, spec, params)

    n, N = x.size, spec.n_leaves
    m = scenario.dynamics.m
    states = np.empty((steps + 1, n))
    inputs = np.empty((steps + 1, m))
    desired = np.empty((steps + 1, m))
    h = np.empty(steps + 1)
    h_c = np.empty(steps + 1)
    leaves = np.empty((steps + 1, N))
    cases = []

    def record(k, x, ev, res):
        states[k] = x
        inputs[k] = res.u_safe
        desired[k] = res.u_des
        h[k] = ev.value
        leaves[k] = ev.leaf_values
        h_c[k] = nonsmooth_levels(spec, ev.leaf_values[:, None])[0][-1][0, 0]
        cases.append(res.case)

    def partial(k):
        return Trajectory(dt * np.arange(k), states[:k].copy(), inputs[:k].copy(), desired[:k].copy(),
                          h[:k].copy(), h_c[:k].copy(), leaves[:k].copy(), cases[:k], params.kappa)

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps + 1):
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(f"state became non-finite at t={k * dt:g}", partial(k))
            try:
                k1, ev, res = full(x)
                record(k, x, ev, res)
                if k == steps:
                    break
                k2 = velocity(x + 0.5 * dt * k1)
                k3 = velocity(x + 0.5 * dt * k2)
                k4 = velocity(x + dt * k3)
            except NonFiniteValue as err:
                raise NonFiniteState(f"non-finite value near t={k * dt:g}: {err}", partial(len(cases))) from err
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return partial(steps + 1)


def simulate_all(scenario) -> list:
    return _map(lambda x0: simulate(scenario, x0=x0), scenario.init)


def kappa_sweep(scenario, kappas, x0=None) -> list:
    """Run the same scenario for each smoothing parameter in ``kappas``."""
    return _map(lambda k: simulate(scenario, x0=x0, kappa=k), list(kappas))


def _map(fn, items):
    threads = int(os.environ.get("BARRIER_COMP_THREADS", "1") or 1)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def max_input_jump(traj: Trajectory) -> float:
    """Largest step-to-step change of the applied input."""
    return float(np.max(np.linalg.norm(np.diff(traj.inputs, axis=0), axis=1)))


def min_distance_to(traj: Trajectory, points) -> float:
    """Closest approach of the path to any of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = np.linalg.norm(traj.states[:, None, :] - pts[None, :, :], axis=-1)
    return float(d.min())


def first_entry(traj: Trajectory) -> int | None:
    """Index of the first sample with ``h >= 0``."""
    idx = np.flatnonzero(traj.h >= 0)
    return int(idx[0]) if idx.size else None


def min_turn_radius(traj: Trajectory, min_speed: float = 0.2) -> float:
    """Tightest turning radius along the path (a proxy for corner clearance).

    Computed as arc length over heading change between consecutive input
    samples, ignoring samples slower than ``min_speed`` where the heading
    is ill-defined.
    """
    u = traj.inputs[:, :2]
    speed = np.linalg.norm(u, axis=1)
    heading = np.arctan2(u[:, 1], u[:, 0])
    dtheta = np.abs(np.angle(np.exp(1j * np.diff(heading))))
    ds = speed[:-1] * np.diff(traj.times)
    ok = (speed[:-1] > min_speed) & (speed[1:] > min_speed) & (dtheta > 0)
    if not ok.any():
        return float("inf")
    return float(np.min(ds[ok] / dtheta[ok]))
