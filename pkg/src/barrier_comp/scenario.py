"""Scenario documents: JSON in, :class:`Scenario` out, and back.

A scenario bundles dynamics, a specification tree, smoothing parameters,
the decay function ``alpha``, a desired controller, initial states and
integration settings.  Buffers may be written as numbers, as ``"ln(k)"``
literals, or as ``"auto_subset"`` / ``"auto_superset"``, which resolve to
the smallest buffer that keeps the smooth safe set inside the exact one
and the largest that keeps it around it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources

import numpy as np

from .compose import CompositionParams, error_bounds
from .dynamics import SingleIntegrator
from .errors import ParseError, SpecError
from .safety_filter import Linear
from .sim import Constant, SaturatedProportional
from .spec import (
    Affine,
    Circle,
    HalfSpace,
    Identity,
    Intersection,
    Leaf,
    Tanh,
    Union,
    layerize,
    validate,
)

AUTO_SUBSET = "auto_subset"
AUTO_SUPERSET = "auto_superset"
_LN = re.compile(r"^\s*(-)?\s*ln\(\s*([^)]+?)\s*\)\s*$")

DEFAULT_OUTPUT = {"dir": "out", "svg": True}


@dataclass(frozen=True, eq=True)
class Scenario:
    dynamics: object
    spec: object
    kappa: float
    buffer: object = 0.0
    alpha: object = Linear(1.0)
    controller: object = None
    init: tuple = ()
    dt: float = 1e-3
    horizon: float = 30.0
    name: str = ""
    workspace: tuple | None = None
    output: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUT))

    def __post_init__(self):
        object.__setattr__(self, "init", tuple(tuple(float(v) for v in x) for x in self.init))
        if self.controller is None:
            object.__setattr__(self, "controller", Constant((0.0,) * self.dynamics.m))
        if self.workspace is not None:
            object.__setattr__(self, "workspace", tuple(tuple(float(v) for v in ax) for ax in self.workspace))
        report = validate(self.spec)
        report.raise_for_errors()
        if report.dim != self.dynamics.n:
            raise SpecError(f"specification has dimension {report.dim}, dynamics has {self.dynamics.n}")
        for x in self.init:
            if len(x) != self.dynamics.n:
                raise SpecError(f"initial state {x} does not have dimension {self.dynamics.n}")
        CompositionParams(self.kappa, 0.0)

    __hash__ = None

    @cached_property
    def layered(self):
        return layerize(self.spec)

    @property
    def params(self) -> CompositionParams:
        return CompositionParams(self.kappa, resolve_buffer(self.buffer, self.layered, self.kappa))

    def with_kappa(self, kappa) -> "Scenario":
        return replace(self, kappa=float(kappa))

    def with_buffer(self, buffer) -> "Scenario":
        return replace(self, buffer=buffer)


def resolve_buffer(expr, layered, kappa=1.0) -> float:
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    if isinstance(expr, str):
        text = expr.strip()
        if text == AUTO_SUBSET:
            return error_bounds(layered, CompositionParams(kappa)).subset_buffer
        if text == AUTO_SUPERSET:
            return error_bounds(layered, CompositionParams(kappa)).superset_buffer
        m = _LN.match(text)
        if m:
            arg = float(m.group(2))
            if not arg > 0:
                raise ValueError(f"ln argument must be positive in {expr!r}")
            return -math.log(arg) if m.group(1) else math.log(arg)
        return float(text)
    raise ValueError(f"cannot interpret buffer {expr!r}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _get(obj, key, path, default=...):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", key=path)
    if key not in obj:
        if default is ...:
            raise ParseError("missing required key", key=f"{path}.{key}" if path else key)
        return default
    return obj[key]


def _vector(value, path):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("expected a list of numbers", key=path) from None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ParseError("expected a flat list of finite numbers", key=path)
    return tuple(float(v) for v in arr)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("expected a number", key=path)
    return float(value)


def _primitive(d, path):
    kind = _get(d, "type", path)
    if kind == "halfspace":
        return HalfSpace(_vector(_get(d, "normal", path), f"{path}.normal"),
                         _vector(_get(d, "anchor", path), f"{path}.anchor"))
    if kind == "circle":
        side = _get(d, "side", path, "inner")
        if side not in ("inner", "outer"):
            raise ParseError("circle side must be 'inner' or 'outer'", key=f"{path}.side")
        return Circle(_vector(_get(d, "center", path), f"{path}.center"),
                      _number(_get(d, "radius", path), f"{path}.radius"), side)
    if kind == "affine":
        return Affine(_vector(_get(d, "coefficients", path), f"{path}.coefficients"),
                      _number(_get(d, "offset", path, 0.0), f"{path}.offset"))
    raise ParseError(f"unknown leaf type {kind!r}", key=f"{path}.type")


_SCALINGS = {"identity": Identity(), "tanh": Tanh()}


def parse_spec(d, path="spec"):
    kind = _get(d, "kind", path)
    if kind == "leaf":
        payload = d.get("primitive", d)
        prim = _primitive(payload, f"{path}.primitive" if "primitive" in d else path)
        scaling = _get(d, "scaling", path, "identity")
        if scaling not in _SCALINGS:
            raise ParseError(f"unknown scaling {scaling!r}", key=f"{path}.scaling")
        negated = _get(d, "negated", path, False)
        if not isinstance(negated, bool):
            raise ParseError("expected true or false", key=f"{path}.negated")
        return Leaf(prim, _SCALINGS[scaling], negated)
    if kind in ("union", "intersection"):
        children = _get(d, "children", path)
        if not isinstance(children, list):
            raise ParseError("expected a list", key=f"{path}.children")
        nodes = tuple(parse_spec(c, f"{path}.children[{i}]") for i, c in enumerate(children))
        return Union(nodes) if kind == "union" else Intersection(nodes)
    raise ParseError(f"unknown node kind {kind!r}", key=f"{path}.kind")


def _dynamics(d):
    kind = _get(d, "type", "dynamics")
    if kind == "single_integrator":
        n = _get(d, "n", "dynamics", 2)
        if not isinstance(n, int) or n < 1:
            raise ParseError("expected a positive integer", key="dynamics.n")
        return SingleIntegrator(n)
    raise ParseError(f"unknown dynamics type {kind!r}", key="dynamics.type")


def _alpha(d):
    kind = _get(d, "type", "alpha")
    if kind == "linear":
        slope = _number(_get(d, "slope", "alpha", 1.0), "alpha.slope")
        if not slope > 0:
            raise ParseError("slope must be positive", key="alpha.slope")
        return Linear(slope)
    raise ParseError(f"unknown alpha type {kind!r}", key="alpha.type")


def _controller(d):
    kind = _get(d, "type", "controller")
    if kind == "saturated_proportional":
        gain = _number(_get(d, "gain", "controller"), "controller.gain")
        u_max = _number(_get(d, "u_max", "controller"), "controller.u_max")
        if not (gain > 0 and u_max > 0):
            raise ParseError("gain and u_max must be positive", key="controller")
        return SaturatedProportional(gain, _vector(_get(d, "target", "controller"), "controller.target"), u_max)
    if kind == "constant":
        return Constant(_vector(_get(d, "u", "controller"), "controller.u"))
    raise ParseError(f"unknown controller type {kind!r}", key="controller.type")


def scenario_from_dict(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    dynamics = _dynamics(_get(doc, "dynamics", ""))
    spec = parse_spec(_get(doc, "spec", ""))
    validate(spec).raise_for_errors()
    comp = _get(doc, "composition", "")
    kappa = _number(_get(comp, "kappa", "composition"), "composition.kappa")
    if not kappa > 0:
        raise ParseError("kappa must be positive", key="composition.kappa")
    buffer = _get(comp, "buffer", "composition", 0.0)
    if isinstance(buffer, bool) or not isinstance(buffer, (int, float, str)):
        raise ParseError("buffer must be a number or string", key="composition.buffer")
    if isinstance(buffer, int):
        buffer = float(buffer)
    try:
        resolve_buffer(buffer, layerize(spec) if isinstance(buffer, str) else None, kappa)
    except ValueError as err:
        raise ParseError(str(err), key="composition.buffer") from None
    alpha = _alpha(doc["alpha"]) if "alpha" in doc else Linear(1.0)
    controller = _controller(doc["controller"]) if "controller" in doc else None

    init = _get(doc, "init", "", [])
    if init and not isinstance(init[0], list):
        init = [init]
    init = tuple(_vector(x, f"init[{i}]") for i, x in enumerate(init))

    integ = _get(doc, "integration", "", {})
    dt = _number(_get(integ, "dt", "integration", 1e-3), "integration.dt")
    horizon = _number(_get(integ, "horizon", "integration", 30.0), "integration.horizon")
    if not (dt > 0 and horizon > 0):
        raise ParseError("dt and horizon must be positive", key="integration")

    output = dict(DEFAULT_OUTPUT)
    output.update(_get(doc, "output", "", {}))
    workspace = output.pop("workspace", None)
    if workspace is not None:
        workspace = tuple(_vector(ax, f"output.workspace[{i}]") for i, ax in enumerate(workspace))
    return Scenario(dynamics=dynamics, spec=spec, kappa=kappa, buffer=buffer, alpha=alpha,
                    controller=controller, init=init, dt=dt, horizon=horizon,
                    name=str(doc.get("name", "")), workspace=workspace, output=output)


def parse_scenario_text(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err.msg}", line=err.lineno) from None
    try:
        return scenario_from_dict(doc)
    except SpecError as err:
        raise ParseError(f"invalid specification: {err}", key="spec") from err


def parse_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario_text(fh.read())


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _prim_dict(prim):
    if isinstance(prim, HalfSpace):
        return {"type": "halfspace", "normal": list(prim.normal), "anchor": list(prim.anchor)}
    if isinstance(prim, Circle):
        return {"type": "circle", "center": list(prim.center), "radius": prim.radius, "side": prim.side}
    if isinstance(prim, Affine):
        return {"type": "affine", "coefficients": list(prim.coefficients), "offset": prim.offset}
    raise TypeError(f"{type(prim).__name__} leaves cannot be serialized")


def spec_to_dict(node):
    if isinstance(node, Leaf):
        d = {"kind": "leaf", **_prim_dict(node.primitive)}
        if node.negated:
            d["negated"] = True
        if not isinstance(node.scaling, Identity):
            names = {type(v): k for k, v in _SCALINGS.items()}
            if type(node.scaling) not in names:
                raise TypeError("custom scalings cannot be serialized")
            d["scaling"] = names[type(node.scaling)]
        return d
    return {"kind": node.kind, "children": [spec_to_dict(c) for c in node.children]}


def scenario_to_dict(sc: Scenario) -> dict:
    if not isinstance(sc.dynamics, SingleIntegrator):
        raise TypeError("only single-integrator dynamics can be serialized")
    if not isinstance(sc.alpha, Linear):
        raise TypeError("only linear alpha can be serialized")
    ctrl = sc.controller
    if isinstance(ctrl, SaturatedProportional):
        cdict = {"type": "saturated_proportional", "gain": ctrl.gain, "target": list(ctrl.target),
                 "u_max": ctrl.u_max}
    elif isinstance(ctrl, Constant):
        cdict = {"type": "constant", "u": list(ctrl.u)}
    else:
        raise TypeError("custom controllers cannot be serialized")
    output = dict(sc.output)
    if sc.workspace is not None:
        output["workspace"] = [list(ax) for ax in sc.workspace]
    return {
        "name": sc.name,
        "dynamics": {"type": "single_integrator", "n": sc.dynamics.n},
        "spec": spec_to_dict(sc.spec),
        "composition": {"kappa": sc.kappa, "buffer": sc.buffer},
        "alpha": {"type": "linear", "slope": sc.alpha.slope},
        "controller": cdict,
        "init": [list(x) for x in sc.init],
        "integration": {"dt": sc.dt, "horizon": sc.horizon},
        "output": output,
    }


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def write_scenario(sc: Scenario, path):
    with open(path, "w") as fh:
        fh.write(dumps_scenario(sc))


# ---------------------------------------------------------------------------
# bundled example scenarios
# ---------------------------------------------------------------------------


def builtin_names() -> list:
    files = resources.files("barrier_comp") / "scenarios"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def builtin_path(name: str):
    return resources.files("barrier_comp") / "scenarios" / f"{name}.json"


def load_builtin(name: str) -> Scenario:
    return parse_scenario_text(builtin_path(name).read_text())
