"""Clarke calculus for locally Lipschitz functionals.

A functional j is packaged together with its analytic generalized directional
derivative  j0(u; v) = limsup_{x->u, t->0+} (j(x + t v) - j(x)) / t,  an
optional subgradient selection, and an optional relaxed-monotonicity constant
alpha_j, the smallest constant with

    j0(v1; v2 - v1) + j0(v2; v1 - v2) <= alpha_j * ||v1 - v2||^2 .

The finite-difference oracle below estimates j0 from j alone; it is an
estimate from below that converges for piecewise-smooth functionals and is
used in tests to cross-check the analytic derivative, never inside solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import VhiError
from .space import as_vector, inner, norm


@dataclass(frozen=True)
class LipschitzFunctional:
    """Locally Lipschitz j with its analytic Clarke directional derivative.

    Attributes:
        value: j itself.
        clarke_dd: (u, v) -> j0(u; v).
        subgradient: optional measurable selection u -> xi with xi in dj(u).
        alpha_j: optional relaxed-monotonicity constant (>= 0).
        regular: True when one-sided directional derivatives exist and agree
            with clarke_dd everywhere (smooth or convex-like functionals).
    """

    value: Callable[[np.ndarray], float]
    clarke_dd: Callable[[np.ndarray, np.ndarray], float]
    subgradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    alpha_j: Optional[float] = None
    regular: bool = False
    name: str = "j"

    def __post_init__(self):
        if self.alpha_j is not None and self.alpha_j < 0:
            raise VhiError("alpha_j must be >= 0")


def zero_functional(dim: int) -> LipschitzFunctional:
    z = np.zeros(dim)
    return LipschitzFunctional(
        value=lambda u: 0.0,
        clarke_dd=lambda u, v: 0.0,
        subgradient=lambda u: z.copy(),
        alpha_j=0.0,
        regular=True,
        name="zero",
    )


def _lattice(u: np.ndarray, radius: float) -> list[np.ndarray]:
    # Deterministic axis-aligned base points within the probe radius,
    # including u itself so one-sided quotients at u are always probed.
    pts = [u.copy()]
    offs = (radius, 0.5 * radius, -0.5 * radius, -radius)
    for i in range(u.size):
        for off in offs:
            x = u.copy()
            x[i] += off
            pts.append(x)
    return pts


def clarke_dd_oracle(value: Callable[[np.ndarray], float], u, v,
                     radius: float = 1e-4, steps: int = 20) -> float:
    """Finite-difference estimate (from below) of j0(u; v).

    Scans difference quotients (j(x + t v) - j(x)) / t over a deterministic
    lattice of base points x with ||x - u|| <= radius and step sizes
    t = radius * 2^-k, k = 1..steps, and returns the maximum.  At kinks this
    recovers the largest one-sided slope, which is the limsup value for the
    piecewise-smooth functionals in scope.
    """
    u = as_vector(u)
    v = as_vector(v)
    if radius <= 0:
        raise VhiError("radius must be > 0")
    if steps < 1:
        raise VhiError("steps must be >= 1")
    if not np.any(v):
        return 0.0
    best = -np.inf
    for x in _lattice(u, radius):
        jx = float(value(x))
        if not np.isfinite(jx):
            raise VhiError(f"non-finite value of j at base point {x}")
        for k in range(1, steps + 1):
            t = radius * 2.0 ** (-k)
            jxt = float(value(x + t * v))
            if not np.isfinite(jxt):
                raise VhiError("non-finite value of j at probe point")
            q = (jxt - jx) / t
            if q > best:
                best = q
    return best


@dataclass(frozen=True)
class Violation:
    kind: str
    point: tuple
    slack: float

    def __str__(self):
        return f"{self.kind} violated by {self.slack:.3e} at {self.point}"


@dataclass
class CalculusReport:
    violations: list[Violation] = field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_calculus_properties(j: LipschitzFunctional,
                              sample: Sequence[tuple],
                              tol: float = 1e-9) -> CalculusReport:
    """Check positive homogeneity, subadditivity and the subgradient
    inequality of ``j.clarke_dd`` on a sample of (u, v, lam) triples.

    Subadditivity needs two directions, so each triple is paired with the
    direction of the next triple (cyclically).  Violations are data, not
    errors: they are returned with their slack.
    """
    report = CalculusReport()
    triples = [(as_vector(u), as_vector(v), float(lam)) for u, v, lam in sample]
    for idx, (u, v, lam) in enumerate(triples):
        report.checks += 1
        base = j.clarke_dd(u, v)
        # j0(u; 0) = 0
        z = j.clarke_dd(u, np.zeros_like(u))
        if abs(z) > tol:
            report.violations.append(Violation("zero_direction", (tuple(u),), abs(z)))
        # positive homogeneity, lam >= 0
        if lam >= 0:
            lhs = j.clarke_dd(u, lam * v)
            gap = abs(lhs - lam * base)
            if gap > tol * max(1.0, abs(lam) * abs(base)):
                report.violations.append(
                    Violation("homogeneity", (tuple(u), tuple(v), lam), gap))
        # subadditivity against the next sampled direction
        w = triples[(idx + 1) % len(triples)][1]
        lhs = j.clarke_dd(u, v + w)
        rhs = j.clarke_dd(u, v) + j.clarke_dd(u, w)
        if lhs > rhs + tol:
            report.violations.append(
                Violation("subadditivity", (tuple(u), tuple(v), tuple(w)), lhs - rhs))
        # subgradient selection must satisfy <xi, v> <= j0(u; v)
        if j.subgradient is not None:
            xi = as_vector(j.subgradient(u))
            val = inner(xi, v)
            if val > base + tol:
                report.violations.append(
                    Violation("subgradient", (tuple(u), tuple(v)), val - base))
    return report


def estimate_alpha_j(j: LipschitzFunctional,
                     sample: Sequence[tuple]) -> float:
    """Sampled lower bound of the relaxed-monotonicity constant.

    Returns  max over pairs (v1, v2) of
    [j0(v1; v2-v1) + j0(v2; v1-v2)] / ||v1-v2||^2,  floored at 0.
    """
    if not sample:
        raise VhiError("estimate_alpha_j: empty sample")
    best = 0.0
    for v1, v2 in sample:
        v1 = as_vector(v1)
        v2 = as_vector(v2)
        d = norm(v1 - v2)
        if d == 0.0:
            raise VhiError("estimate_alpha_j: pair with v1 == v2")
        q = (j.clarke_dd(v1, v2 - v1) + j.clarke_dd(v2, v1 - v2)) / d ** 2
        if q > best:
            best = q
    return best


def check_subgradient_growth(j: LipschitzFunctional, points: Sequence,
                             c0: float, c1: float,
                             tol: float = 1e-12) -> list[Violation]:
    """Spot-check the growth bound ||xi|| <= c0 + c1 ||v|| on the declared
    subgradient selection.  Only the selection is checked; the full
    subdifferential is not enumerable."""
    if j.subgradient is None:
        raise VhiError("functional declares no subgradient selection")
    out = []
    for pt in points:
        v = as_vector(pt)
        lhs = norm(j.subgradient(v))
        rhs = c0 + c1 * norm(v)
        if lhs > rhs + tol:
            out.append(Violation("growth", (tuple(v),), lhs - rhs))
    return out
