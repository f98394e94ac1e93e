"""Named problem presets and config-file construction.

Config files are JSON (UTF-8).  Two shapes are accepted:

* preset reference::

      {"problem": "example1", "params": {"f": 2.0}}

* generic assembly from named components::

      {"dim": 1,
       "A": {"name": "scaled_identity", "scale": 2.0},
       "phi": {"name": "zero"},
       "j": {"name": "example1"},
       "K": {"name": "all"},
       "f": [1.0]}

* contact model::

      {"contact": {"n_nodes": 3, "tangential_dim": 1, ...}}

Numeric fields survive a parse -> dump -> parse round trip bit-exactly
(JSON floats are serialized in shortest round-trip decimal form).
"""

from __future__ import annotations

import json
from typing import Callable, Optional

import numpy as np

from . import contact as contact_mod
from .clarke import LipschitzFunctional, zero_functional
from .contact import (BallRegion, BoxRegion, COMPLIANCE_LAWS, ContactModel,
                      FRICTION_LAWS, assemble)
from .errors import VhiError
from .examples import (build_example1, build_example2, build_identity,
                       build_mono2, ex1_functional, ex2_functional)
from .problem import (BiFunctional, ConstraintSet, OperatorA, VhiProblem,
                      box_set, whole_space, zero_bifunctional)
from .space import SpaceDescriptor, as_vector, norm


# --------------------------------------------------------------------------
# contact presets

def default_contact3() -> ContactModel:
    """Three contact nodes (normal + one tangential DOF each) on a stiff
    coupled support; smallness margin comfortably positive."""
    dim = 6
    s = 8.0 * np.eye(dim)
    ni = np.arange(3) * 2
    for a, b in ((ni[0], ni[1]), (ni[1], ni[2])):
        s[a, b] = s[b, a] = -1.0
    f0 = np.array([2.0, 0.5, 2.0, 0.5, 2.0, 0.5])
    f2 = np.zeros(dim)
    f2[0] = 0.3
    return ContactModel(
        n_nodes=3,
        stiffness=s,
        compliance=contact_mod.compliance_clamped(1.0, 1.0),
        friction=contact_mod.friction_linear(0.1),
        g=np.array([0.05, 0.10, 0.15]),
        k=np.array([1.0, 1.0, 1.0]),
        f0=f0,
        f2=f2,
        region=BallRegion(5.0),
        omega=0.5,
        tangential_dim=1)


def degenerate_contact() -> ContactModel:
    """Single node, zero stiffness, zero loads, box locking region: the
    feasible core has nonempty interior, so the problem has a continuum of
    solutions (stock ill-posedness demonstration)."""
    return ContactModel(
        n_nodes=1,
        stiffness=np.zeros((2, 2)),
        compliance=contact_mod.compliance_clamped(1.0, 1.0),
        friction=contact_mod.friction_linear(0.1),
        g=np.array([0.5]),
        k=np.array([1.0]),
        f0=np.zeros(2),
        f2=np.zeros(2),
        region=BoxRegion(-1.0, 1.0),
        omega=1.0,
        tangential_dim=1)


PROBLEM_PRESETS: dict[str, Callable[..., VhiProblem]] = {
    "example1": lambda f=1.0: build_example1(float(f)),
    "example2": lambda f=2.0: build_example2(float(f)),
    "mono2": lambda f=1.0: build_mono2(float(f)),
    "identity": lambda f=0.0, dim=1: build_identity(f, dim=int(dim)),
    "contact3": lambda: assemble(default_contact3()),
}

MODEL_PRESETS: dict[str, Callable[[], ContactModel]] = {
    "contact3": default_contact3,
    "contact_illposed": degenerate_contact,
}


def build_problem(name: str, **params) -> VhiProblem:
    if name not in PROBLEM_PRESETS:
        raise VhiError(f"unknown problem {name!r}; "
                       f"known: {sorted(PROBLEM_PRESETS)}")
    return PROBLEM_PRESETS[name](**params)


# --------------------------------------------------------------------------
# generic component registries

def _make_operator(spec: dict, dim: int) -> OperatorA:
    name = spec.get("name", "scaled_identity")
    if name == "scaled_identity":
        scale = float(spec.get("scale", 1.0))
        return OperatorA(apply=lambda u: scale * as_vector(u), m_A=scale,
                         name=f"{scale:g}*id")
    if name == "matrix":
        m = np.asarray(spec["entries"], dtype=float).reshape(dim, dim)
        sym = 0.5 * (m + m.T)
        lam = float(np.linalg.eigvalsh(sym)[0])
        return OperatorA(apply=lambda u: m @ as_vector(u),
                         m_A=lam if lam > 0 else None, name="matrix")
    raise VhiError(f"unknown operator {name!r}")


def _make_functional(spec: dict, dim: int) -> LipschitzFunctional:
    name = spec.get("name", "zero")
    if name == "zero":
        return zero_functional(dim)
    if name == "example1":
        return ex1_functional()
    if name == "example2":
        return ex2_functional()
    if name == "half_sq":
        return LipschitzFunctional(
            value=lambda u: 0.5 * float(np.dot(as_vector(u), as_vector(u))),
            clarke_dd=lambda u, v: float(np.dot(as_vector(u), as_vector(v))),
            subgradient=lambda u: as_vector(u).copy(),
            alpha_j=0.0, regular=True, name="half_sq")
    raise VhiError(f"unknown functional {name!r}")


def _make_bifunctional(spec: dict) -> BiFunctional:
    name = spec.get("name", "zero")
    if name == "zero":
        return zero_bifunctional()
    raise VhiError(f"unknown bifunctional {name!r}")


def _make_constraints(spec: dict, dim: int) -> ConstraintSet:
    name = spec.get("name", "all")
    if name == "all":
        return whole_space(dim)
    if name == "box":
        return box_set(spec.get("lo"), spec.get("hi"), dim=dim)
    raise VhiError(f"unknown constraint set {name!r}")


def problem_from_config(cfg: dict) -> VhiProblem:
    if "problem" in cfg:
        return build_problem(cfg["problem"], **cfg.get("params", {}))
    if "contact" in cfg:
        return assemble(model_from_config(cfg["contact"]))
    dim = int(cfg["dim"])
    f = as_vector(cfg["f"])
    if f.size != dim:
        raise VhiError(f"f has {f.size} entries, expected {dim}")
    return VhiProblem(
        space=SpaceDescriptor(dim),
        K=_make_constraints(cfg.get("K", {}), dim),
        A=_make_operator(cfg.get("A", {}), dim),
        phi=_make_bifunctional(cfg.get("phi", {})),
        j=_make_functional(cfg.get("j", {}), dim),
        f=f,
        name=cfg.get("name", "config"))


# --------------------------------------------------------------------------
# contact model <-> config

def _law_from_config(spec: dict, table: dict, kind: str):
    name = spec.get("name")
    if name not in table:
        raise VhiError(f"unknown {kind} law {name!r}; known: {sorted(table)}")
    params = {k: v for k, v in spec.items() if k != "name"}
    return table[name](**params)


def model_from_config(cfg: dict) -> ContactModel:
    region_cfg = cfg.get("region", {"kind": "box", "lo": float("-inf"),
                                    "hi": float("inf")})
    if region_cfg["kind"] == "box":
        region = BoxRegion(float(region_cfg["lo"]), float(region_cfg["hi"]))
    elif region_cfg["kind"] == "ball":
        region = BallRegion(float(region_cfg["radius"]))
    else:
        raise VhiError(f"unknown region kind {region_cfg['kind']!r}")
    return ContactModel(
        n_nodes=int(cfg["n_nodes"]),
        tangential_dim=int(cfg.get("tangential_dim", 1)),
        stiffness=np.asarray(cfg["stiffness"], dtype=float),
        compliance=_law_from_config(cfg["compliance"], COMPLIANCE_LAWS,
                                    "compliance"),
        friction=_law_from_config(cfg["friction"], FRICTION_LAWS, "friction"),
        g=np.asarray(cfg["g"], dtype=float),
        k=np.asarray(cfg["k"], dtype=float),
        f0=np.asarray(cfg["f0"], dtype=float),
        f2=np.asarray(cfg["f2"], dtype=float),
        region=region,
        omega=np.asarray(cfg.get("omega", 0.0), dtype=float))


def model_to_config(model: ContactModel) -> dict:
    if isinstance(model.region, BoxRegion):
        region = {"kind": "box", "lo": model.region.lo, "hi": model.region.hi}
    else:
        region = {"kind": "ball", "radius": model.region.radius}
    comp_name, comp_params = _law_params(model.compliance.name)
    fric_name, fric_params = _law_params(model.friction.name)
    return {
        "n_nodes": model.n_nodes,
        "tangential_dim": model.tangential_dim,
        "stiffness": model.stiffness.tolist(),
        "compliance": {"name": comp_name, **comp_params},
        "friction": {"name": fric_name, **fric_params},
        "g": model.g.tolist(),
        "k": model.k.tolist(),
        "f0": model.f0.tolist(),
        "f2": model.f2.tolist(),
        "region": region,
        "omega": model.omega.tolist(),
    }


def _law_params(name: str) -> tuple[str, dict]:
    # law names encode their parameters: e.g. "clamped(1,0.5)"
    base, _, rest = name.partition("(")
    vals = [float(x) for x in rest.rstrip(")").split(",")] if rest else []
    keys = {"linear": ["slope"], "clamped": ["slope", "cap"],
            "hump": ["slope"]}[base]
    return base, dict(zip(keys, vals))


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True)
