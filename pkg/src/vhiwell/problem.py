"""The inequality problem model.

A problem bundles a constraint set K, a (pseudo)monotone operator A, a
bifunctional phi (convex in its second slot), a locally Lipschitz functional
j, and a load f, all over R^n.  A point u in K solves the problem when

    <A u - f, v - u> + phi(u, v) - phi(u, u) + j0(u; v - u) >= 0    for all v in K.

``gap`` evaluates the left-hand side for one pair (u, v); the well-posedness
machinery in :mod:`vhiwell.wellposed` is built on it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .clarke import LipschitzFunctional
from .errors import InfeasiblePoint, VhiError
from .space import SpaceDescriptor, as_vector, inner, norm, project_interval_box


@dataclass(frozen=True)
class ConstraintSet:
    """Closed (convex where required) set given by membership test,
    projection map and a feasible-point sampler."""

    contains: Callable[[np.ndarray], bool]
    project: Callable[[np.ndarray], np.ndarray]
    sample_feasible: Callable[[int, int], list]
    is_convex: bool = True
    is_closed: bool = True
    name: str = "K"


def whole_space(dim: int) -> ConstraintSet:
    def sample(count, seed):
        rng = np.random.default_rng(seed)
        return list(rng.normal(scale=2.0, size=(count, dim)))

    return ConstraintSet(
        contains=lambda v: True,
        project=lambda v: as_vector(v),
        sample_feasible=sample,
        name="all",
    )


def box_set(lo, hi, dim: Optional[int] = None) -> ConstraintSet:
    """Axis-aligned box {lo <= v <= hi}; None / +-inf entries drop a bound."""
    if dim is None:
        dim = max(np.size(lo if lo is not None else hi), 1)
    lo_arr = np.full(dim, -np.inf) if lo is None else np.broadcast_to(
        np.asarray(lo, dtype=float), (dim,)).copy()
    hi_arr = np.full(dim, np.inf) if hi is None else np.broadcast_to(
        np.asarray(hi, dtype=float), (dim,)).copy()

    def contains(v, _lo=lo_arr, _hi=hi_arr):
        v = as_vector(v)
        return bool(np.all(v >= _lo - 1e-12) and np.all(v <= _hi + 1e-12))

    def sample(count, seed, _lo=lo_arr, _hi=hi_arr):
        rng = np.random.default_rng(seed)
        lo_f = np.where(np.isfinite(_lo), _lo, -3.0)
        hi_f = np.where(np.isfinite(_hi), _hi, 3.0)
        return list(lo_f + rng.random((count, dim)) * (hi_f - lo_f))

    return ConstraintSet(
        contains=contains,
        project=lambda v: project_interval_box(v, lo_arr, hi_arr),
        sample_feasible=sample,
        name="box",
    )


@dataclass(frozen=True)
class OperatorA:
    """Operator A : R^n -> R^n with declared regularity constants.

    ``is_pseudomonotone`` is a declared hypothesis flag: pseudomonotonicity
    quantifies over all sequences and cannot be decided pointwise, so the
    diagnosis reports rest on it instead of inferring it.
    """

    apply: Callable[[np.ndarray], np.ndarray]
    m_A: Optional[float] = None
    is_pseudomonotone: bool = True
    name: str = "A"

    def __post_init__(self):
        if self.m_A is not None and self.m_A <= 0:
            raise VhiError("m_A must be > 0 when declared")


@dataclass(frozen=True)
class BiFunctional:
    """phi : R^n x R^n -> R, convex in the second slot on the strongly
    monotone path.  ``limsup_compatible`` declares the sequential upper-limit
    hypothesis used by the diameter criterion (not machine-checkable).

    ``v_subgradient(eta, v)`` returns a subgradient of phi(eta, .) at v and
    is required by the projection solver whenever phi is nonzero.
    """

    value: Callable[[np.ndarray, np.ndarray], float]
    alpha_phi: Optional[float] = None
    v_subgradient: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    limsup_compatible: bool = True
    is_zero: bool = False
    name: str = "phi"

    def __post_init__(self):
        if self.alpha_phi is not None and self.alpha_phi < 0:
            raise VhiError("alpha_phi must be >= 0 when declared")


def zero_bifunctional() -> BiFunctional:
    return BiFunctional(
        value=lambda eta, v: 0.0,
        alpha_phi=0.0,
        v_subgradient=lambda eta, v: np.zeros_like(as_vector(v)),
        is_zero=True,
        name="zero",
    )


@dataclass(frozen=True)
class VhiProblem:
    """Immutable problem bundle; every solver and diagnostic consumes this.

    Optional closed-form hooks (populated by the registry for problems whose
    slack sets are known analytically):

    * ``exact_residual``: u -> smallest eps with u in the eps-slack set.
    * ``omega_intervals``: eps -> list of (lo, hi) intervals describing the
      slack set exactly (1-D problems only).
    """

    space: SpaceDescriptor
    K: ConstraintSet
    A: OperatorA
    phi: BiFunctional
    j: LipschitzFunctional
    f: np.ndarray
    exact_residual: Optional[Callable[[np.ndarray], float]] = None
    omega_intervals: Optional[Callable[[float], list]] = None
    name: str = "problem"

    def __post_init__(self):
        f = as_vector(self.f)
        object.__setattr__(self, "f", f)
        if f.size != self.space.dim:
            raise VhiError(
                f"load dimension {f.size} != space dimension {self.space.dim}")

    @property
    def dim(self) -> int:
        return self.space.dim

    def replace(self, **kw) -> "VhiProblem":
        # closed-form hooks close over the data; changing any component
        # silently invalidates them, so drop hooks not explicitly re-supplied
        if any(field in kw for field in ("f", "A", "phi", "j", "K")):
            kw.setdefault("exact_residual", None)
            kw.setdefault("omega_intervals", None)
        return dataclasses.replace(self, **kw)


def gap(problem: VhiProblem, u, v, check_feasible: bool = True) -> float:
    """Left-hand side of the inequality at the pair (u, v):

        <A u - f, v - u> + phi(u, v) - phi(u, u) + j0(u; v - u).

    u solves the problem iff gap(u, v) >= 0 for every feasible v, and
    gap(u, u) = 0 always.
    """
    u = as_vector(u)
    v = as_vector(v)
    if check_feasible:
        if not problem.K.contains(u):
            raise InfeasiblePoint(f"u = {u} is not in K")
        if not problem.K.contains(v):
            raise InfeasiblePoint(f"v = {v} is not in K")
    w = v - u
    val = inner(as_vector(problem.A.apply(u)) - problem.f, w)
    if not problem.phi.is_zero:
        val += problem.phi.value(u, v) - problem.phi.value(u, u)
    val += problem.j.clarke_dd(u, w)
    return float(val)


def smallness_margin(problem: VhiProblem) -> Optional[float]:
    """m_A - alpha_phi - alpha_j when all three constants are declared,
    else None.  A positive value certifies the strongly monotone path and
    feeds the residual-to-error certificate."""
    m = problem.A.m_A
    a_phi = problem.phi.alpha_phi
    a_j = problem.j.alpha_j
    if m is None or a_phi is None or a_j is None:
        return None
    return float(m - a_phi - a_j)
