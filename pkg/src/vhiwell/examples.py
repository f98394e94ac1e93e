"""Closed-form one-dimensional model problems.

Both problems live on R with A u = u, phi = 0 and a piecewise-quadratic
locally Lipschitz potential j whose derivative p makes the inequality
equivalent to the scalar equation  u + p(u) = f.  They are the two standard
diagnostics of the package:

* ``example1``: p(u) = u / 2-u / u-2 on u<1 / [1,2] / u>2.  The map
  T(u) = u + p(u) is continuous nondecreasing with a flat step T == 2 on
  [1, 2], so the solution set is {f/2} for f < 2, the whole interval [1, 2]
  for f = 2, and {(f+2)/2} for f > 2.  Ill-posed exactly at f = 2 (diameter
  limit 1), well-posed for every other load (diameter limit 0).

* ``example2``: p(u) = -2u+3 / 1 on u<1 / u>=1.  T(u) = u + p(u) decreases
  on u < 1 and increases on u >= 1 with minimum T(1) = 2, so there is no
  solution for f < 2, the unique solution {1} at f = 2, and the two-point
  set {3-f, f-1} for f > 2.  Well-posed exactly at f = 2; for f > 2 the
  slack-set diameter tends to 2f - 4 > 0.

``mono2`` is example1 driven by the strongly monotone operator A u = 2u,
which restores the smallness margin (2 - 0 - 1 = 1) and hence unique
solvability with the residual-to-error certificate eps / 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .clarke import LipschitzFunctional
from .problem import (BiFunctional, OperatorA, VhiProblem, whole_space,
                      zero_bifunctional)
from .space import SpaceDescriptor, as_vector


# --------------------------------------------------------------------------
# result containers

@dataclass(frozen=True)
class SolutionSet:
    """Exact solution set of a 1-D problem: isolated points and/or one
    interval (exact set arithmetic, no sampled clouds)."""

    points: Tuple[float, ...] = ()
    interval: Optional[Tuple[float, float]] = None

    @property
    def empty(self) -> bool:
        return not self.points and self.interval is None


@dataclass(frozen=True)
class OmegaIntervals:
    """Slack-set description: a union of closed intervals.

    ``stated`` is False when the requested (f, eps) falls outside the range
    where the closed-form branch formulas are valid; callers must not
    extrapolate such results.
    """

    intervals: Tuple[Tuple[float, float], ...] = ()
    stated: bool = True

    @property
    def empty(self) -> bool:
        return not self.intervals

    def span(self) -> float:
        """Diameter of the union (0 for the empty set)."""
        if not self.intervals:
            return 0.0
        lo = min(a for a, _ in self.intervals)
        hi = max(b for _, b in self.intervals)
        return hi - lo

    def contains(self, u: float, tol: float = 0.0) -> bool:
        return any(a - tol <= u <= b + tol for a, b in self.intervals)


def _merge(intervals: List[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
    out: List[Tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if lo > hi:
            continue
        if out and lo <= out[-1][1] + 1e-15:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


# --------------------------------------------------------------------------
# example 1

def ex1_p(u: float) -> float:
    if u < 1.0:
        return u
    if u <= 2.0:
        return 2.0 - u
    return u - 2.0


def ex1_j(u: float) -> float:
    if u < 1.0:
        return 0.5 * u * u
    if u <= 2.0:
        return 2.0 * u - 0.5 * u * u - 1.0
    return 0.5 * u * u - 2.0 * u + 3.0


def _ex1_T(u: float) -> float:
    return u + ex1_p(u)


def ex1_solutions(f: float) -> SolutionSet:
    if f < 2.0:
        return SolutionSet(points=(f / 2.0,))
    if f == 2.0:
        return SolutionSet(interval=(1.0, 2.0))
    return SolutionSet(points=((f + 2.0) / 2.0,))


def _ex1_inv_min(t: float) -> float:
    # smallest u with T(u) >= t
    if t < 2.0:
        return t / 2.0
    if t == 2.0:
        return 1.0
    return (t + 2.0) / 2.0


def _ex1_inv_max(t: float) -> float:
    # largest u with T(u) <= t
    if t < 2.0:
        return t / 2.0
    if t == 2.0:
        return 2.0
    return (t + 2.0) / 2.0


def ex1_slack_exact(f: float, eps: float) -> OmegaIntervals:
    """Exact slack set {u : |T(u) - f| <= eps} for any eps > 0 (T is
    continuous and nondecreasing, so the preimage is one interval)."""
    return OmegaIntervals(intervals=((_ex1_inv_min(f - eps), _ex1_inv_max(f + eps)),))


def ex1_omega(f: float, eps: float) -> OmegaIntervals:
    """Branch-formula slack set; flagged not-stated outside branch validity."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if f == 2.0:
        return OmegaIntervals(intervals=(((2.0 - eps) / 2.0, (4.0 + eps) / 2.0),))
    # validity guards eps < 2-f / eps < f-2 are evaluated as f+eps < 2 /
    # f-eps > 2, which is exact at the branch boundary in floating point
    if f < 2.0 and f + eps < 2.0:
        return OmegaIntervals(intervals=(((f - eps) / 2.0, (f + eps) / 2.0),))
    if f > 2.0 and f - eps > 2.0:
        return OmegaIntervals(
            intervals=(((f + 2.0 - eps) / 2.0, (f + 2.0 + eps) / 2.0),))
    return OmegaIntervals(stated=False)


def ex1_diam_limit(f: float) -> float:
    return 1.0 if f == 2.0 else 0.0


# --------------------------------------------------------------------------
# example 2

def ex2_p(u: float) -> float:
    if u < 1.0:
        return -2.0 * u + 3.0
    return 1.0


def ex2_j(u: float) -> float:
    if u < 1.0:
        return -u * u + 3.0 * u
    return u + 1.0


def _ex2_T(u: float) -> float:
    return u + ex2_p(u)


def ex2_solutions(f: float) -> SolutionSet:
    if f < 2.0:
        return SolutionSet()
    if f == 2.0:
        return SolutionSet(points=(1.0,))
    return SolutionSet(points=(3.0 - f, f - 1.0))


def ex2_slack_exact(f: float, eps: float) -> OmegaIntervals:
    """Exact slack set: union of the preimages under the two monotone
    branches of T (decreasing -u+3 on u < 1, increasing u+1 on u >= 1)."""
    lo_t, hi_t = f - eps, f + eps
    pieces: List[Tuple[float, float]] = []
    # branch u < 1: T = -u + 3
    a, b = 3.0 - hi_t, 3.0 - lo_t
    if a <= min(b, 1.0):
        pieces.append((a, min(b, 1.0)))
    # branch u >= 1: T = u + 1
    a, b = lo_t - 1.0, hi_t - 1.0
    if max(a, 1.0) <= b:
        pieces.append((max(a, 1.0), b))
    return OmegaIntervals(intervals=_merge(pieces))


def ex2_omega(f: float, eps: float) -> OmegaIntervals:
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if f == 2.0:
        return OmegaIntervals(intervals=((1.0 - eps, 1.0 + eps),))
    if f < 2.0 and f + eps < 2.0:
        return OmegaIntervals(intervals=())
    if f > 2.0 and f - eps > 2.0:
        return OmegaIntervals(intervals=_merge(
            [(3.0 - f - eps, 3.0 - f + eps), (f - 1.0 - eps, f - 1.0 + eps)]))
    return OmegaIntervals(stated=False)


def ex2_diam_limit(f: float) -> Optional[float]:
    if f == 2.0:
        return 0.0
    if f > 2.0:
        return 2.0 * f - 4.0
    return None  # slack sets are empty for small eps; no limit to report


# --------------------------------------------------------------------------
# functionals and problem builders

def _scalar_functional(value, slope, alpha, name) -> LipschitzFunctional:
    return LipschitzFunctional(
        value=lambda u: float(value(float(as_vector(u)[0]))),
        clarke_dd=lambda u, v: float(slope(float(as_vector(u)[0]))) * float(as_vector(v)[0]),
        subgradient=lambda u: np.array([slope(float(as_vector(u)[0]))]),
        alpha_j=alpha,
        regular=True,
        name=name,
    )


def ex1_functional() -> LipschitzFunctional:
    # alpha_j = 1: the steepest downward chord of p has slope -1 (on [1, 2])
    return _scalar_functional(ex1_j, ex1_p, 1.0, "example1_potential")


def ex2_functional() -> LipschitzFunctional:
    # alpha_j = 2: p falls with slope -2 on u < 1
    return _scalar_functional(ex2_j, ex2_p, 2.0, "example2_potential")


def _scalar_problem(f: float, a_scale: float, j: LipschitzFunctional,
                    T, slack, name: str) -> VhiProblem:
    f_arr = np.array([float(f)])

    def residual(u, _f=float(f)):
        return abs(T(float(as_vector(u)[0])) - _f)

    return VhiProblem(
        space=SpaceDescriptor(1),
        K=whole_space(1),
        A=OperatorA(apply=lambda u: a_scale * as_vector(u), m_A=a_scale,
                    name=f"{a_scale:g}*id"),
        phi=zero_bifunctional(),
        j=j,
        f=f_arr,
        exact_residual=residual,
        omega_intervals=lambda eps, _f=float(f): list(slack(_f, eps).intervals),
        name=name,
    )


def build_example1(f: float) -> VhiProblem:
    return _scalar_problem(f, 1.0, ex1_functional(), _ex1_T, ex1_slack_exact,
                           "example1")


def build_example2(f: float) -> VhiProblem:
    return _scalar_problem(f, 1.0, ex2_functional(), _ex2_T, ex2_slack_exact,
                           "example2")


# ----- strongly monotone variant of example 1 ------------------------------

def _mono2_T(u: float) -> float:
    return 2.0 * u + ex1_p(u)


def mono2_solution(f: float) -> float:
    """Closed-form inverse of the strictly increasing map 2u + p(u)."""
    if f < 3.0:
        return f / 3.0
    if f <= 4.0:
        return f - 2.0
    return (f + 2.0) / 3.0


def mono2_slack_exact(f: float, eps: float) -> OmegaIntervals:
    return OmegaIntervals(
        intervals=((mono2_solution(f - eps), mono2_solution(f + eps)),))


def build_mono2(f: float = 1.0) -> VhiProblem:
    return _scalar_problem(f, 2.0, ex1_functional(), _mono2_T,
                           mono2_slack_exact, "mono2")


# ----- trivial identity equation -------------------------------------------

def build_identity(f, dim: Optional[int] = None) -> VhiProblem:
    """A = id, phi = 0, j = 0, K = R^n: the equation u = f."""
    f_arr = as_vector(f) if np.ndim(f) else np.full(dim or 1, float(f))
    n = f_arr.size
    from .clarke import zero_functional

    prob = VhiProblem(
        space=SpaceDescriptor(n),
        K=whole_space(n),
        A=OperatorA(apply=lambda u: as_vector(u).copy(), m_A=1.0, name="id"),
        phi=zero_bifunctional(),
        j=zero_functional(n),
        f=f_arr,
        exact_residual=lambda u: float(np.linalg.norm(as_vector(u) - f_arr)),
        omega_intervals=(
            (lambda eps: [(f_arr[0] - eps, f_arr[0] + eps)]) if n == 1 else None),
        name="identity",
    )
    return prob
