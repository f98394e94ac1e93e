"""Solvers producing elements of the solution set.

Three routes:

* an exhaustive 1-D residual scan that recovers isolated solutions and
  solution *intervals* (non-uniqueness shows up as a contiguous low-residual
  run, reported as an interval rather than thousands of points);
* a damped projected iteration for the strongly monotone path
  u_{k+1} = P_K(u_k - rho (A u_k + xi_k + eta_k - f)) with subgradient
  selections xi_k of j and eta_k of phi(u_k, .);
* the operator-equation route T u = f (bisection in 1-D, damped iteration
  otherwise) with its ball characterization of the slack sets:
  u in Omega(eps)  iff  ||T u - f|| <= eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .clarke import LipschitzFunctional
from .errors import (DivergenceError, MissingData, SolverFailure, VhiError)
from .problem import (BiFunctional, OperatorA, VhiProblem, whole_space,
                      zero_bifunctional)
from .space import SpaceDescriptor, as_vector, inner, norm
from .wellposed import residual as vhi_residual


@dataclass
class SolveReport:
    """Solutions with their residuals; 1-D interval findings separately."""

    solutions: List[np.ndarray]
    residuals: List[float]
    iterations: int
    converged: bool
    method: str
    intervals: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return len(self.solutions) == 1 and not self.intervals


# --------------------------------------------------------------------------
# 1-D exhaustive scan

def solve_1d_grid(problem: VhiProblem, lo: float = -10.0, hi: float = 10.0,
                  step: float = 1e-4,
                  separation_factor: float = 10.0) -> SolveReport:
    """Exhaustive residual scan of a 1-D problem on [lo, hi].

    Flags every grid point whose residual is at most C * step, where C is
    the sampled Lipschitz constant of the residual along the grid (so no
    true zero between samples can be missed).  Contiguous flagged runs wider
    than ``separation_factor * step`` are reported as intervals; shorter
    runs collapse to their argmin.
    """
    if problem.dim != 1:
        raise VhiError("solve_1d_grid requires a 1-D problem")
    if not lo < hi:
        raise VhiError("empty grid: lo must be < hi")
    if step <= 0:
        raise VhiError("step must be > 0")
    n = int(math.floor((hi - lo) / step)) + 1
    if n < 2:
        raise VhiError("empty grid")
    xs = lo + step * np.arange(n)
    res = np.empty(n)
    for i, x in enumerate(xs):
        res[i] = vhi_residual(problem, np.array([x]))
    c = max(1.0, float(np.max(np.abs(np.diff(res)))) / step)
    threshold = c * step
    flagged = res <= threshold

    solutions: List[np.ndarray] = []
    residuals: List[float] = []
    intervals: List[Tuple[float, float]] = []
    i = 0
    while i < n:
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flagged[j + 1]:
            j += 1
        width = xs[j] - xs[i]
        if width > separation_factor * step:
            intervals.append((float(xs[i]), float(xs[j])))
        else:
            k = i + int(np.argmin(res[i:j + 1]))
            solutions.append(np.array([xs[k]]))
            residuals.append(float(res[k]))
        i = j + 1
    converged = bool(solutions or intervals)
    return SolveReport(solutions=solutions, residuals=residuals,
                       iterations=n, converged=converged,
                       method="grid_1d", intervals=intervals)


# --------------------------------------------------------------------------
# damped projected iteration

def _monotone_map(problem: VhiProblem) -> Callable[[np.ndarray], np.ndarray]:
    if problem.j.subgradient is None:
        raise MissingData("projected iteration needs a subgradient selection for j")
    if not problem.phi.is_zero and problem.phi.v_subgradient is None:
        raise MissingData("projected iteration needs a second-slot "
                          "subgradient selection for phi")

    def g(u: np.ndarray) -> np.ndarray:
        out = as_vector(problem.A.apply(u)) + as_vector(problem.j.subgradient(u)) \
            - problem.f
        if not problem.phi.is_zero:
            out = out + as_vector(problem.phi.v_subgradient(u, u))
        return out

    return g


def _estimate_lipschitz(g, dim: int, scale: float, seed: int = 0,
                        pairs: int = 32) -> float:
    rng = np.random.default_rng(seed)
    best = 1e-12
    for _ in range(pairs):
        x = rng.normal(scale=scale, size=dim)
        y = x + rng.normal(scale=0.1 * scale, size=dim)
        d = norm(x - y)
        if d == 0:
            continue
        q = norm(g(x) - g(y)) / d
        if q > best:
            best = q
    return best


def solve_strongly_monotone(problem: VhiProblem, rho: Optional[float] = None,
                            tol: float = 1e-8, max_iter: int = 200_000,
                            x0=None, seed: int = 0) -> SolveReport:
    """Damped projected iteration for problems with positive smallness margin.

    Default step size rho = 0.5 * m_A / L^2 with L a sampled Lipschitz
    quotient of the full monotone map (the standard contraction regime for
    projected iterations).  Stops when the problem residual drops to tol.
    The step is halved, a bounded number of times, if the residual stalls
    (nonsmooth selections can chatter at too-large steps).  Iterate norms
    beyond 1e6 abort with a divergence diagnostic.
    """
    from .problem import smallness_margin
    margin = smallness_margin(problem)
    if margin is None or margin <= 0:
        raise MissingData(
            f"projected iteration needs a positive smallness margin, got {margin}")
    g = _monotone_map(problem)
    u = as_vector(x0).copy() if x0 is not None else problem.K.project(
        np.zeros(problem.dim))
    if rho is None:
        scale = max(1.0, norm(problem.f), norm(u))
        lip = max(_estimate_lipschitz(g, problem.dim, scale, seed=seed),
                  problem.A.m_A)
        rho = 0.5 * problem.A.m_A / lip ** 2
    best_res = math.inf
    since_best = 0
    halvings = 0
    for it in range(1, max_iter + 1):
        step = g(u)
        u_next = problem.K.project(u - rho * step)
        move = norm(u_next - u)
        u = u_next
        if norm(u) > 1e6:
            raise DivergenceError(
                f"iterate norm blew up at iteration {it} (rho={rho:g})")
        # cheap gate first: the fixed-point displacement bounds the residual
        # check frequency; the actual residual decides convergence
        if move <= rho * tol * 4.0 or it % 50 == 0:
            r = vhi_residual(problem, u)
            if r <= tol:
                return SolveReport(solutions=[u], residuals=[r],
                                   iterations=it, converged=True,
                                   method="projected_monotone")
            if r < best_res - 1e-16:
                best_res = r
                since_best = 0
            else:
                since_best += 1
                if since_best >= 60 and halvings < 10:
                    rho *= 0.5
                    halvings += 1
                    since_best = 0
    raise SolverFailure(
        f"projected iteration did not reach tol={tol:g} in {max_iter} "
        f"iterations (best residual {best_res:g})")


# --------------------------------------------------------------------------
# operator equations

@dataclass(frozen=True)
class EquationOperator:
    """Operator T with an optional additive decomposition T = A + L + P."""

    T: Callable[[np.ndarray], np.ndarray]
    decomposition: Optional[Tuple[Callable, Callable, Callable]] = None
    name: str = "T"

    def check_decomposition(self, points: Sequence, tol: float = 1e-9) -> bool:
        if self.decomposition is None:
            return True
        a, l, p = self.decomposition
        for x in points:
            x = as_vector(x)
            lhs = as_vector(self.T(x))
            rhs = as_vector(a(x)) + as_vector(l(x)) + as_vector(p(x))
            if norm(lhs - rhs) > tol:
                return False
        return True


def equation_problem(op: EquationOperator, f, dim: int,
                     exact_hooks: bool = True) -> VhiProblem:
    """The inequality problem induced by T u = f on the whole space.

    With a decomposition (A, L, P), the L part is exposed through phi and
    the P part through the directional derivative of j (gap values are
    identical either way); without one, all of T sits in the operator slot.
    Pass ``exact_hooks=False`` to force direction-sampled membership (used
    by agreement tests against the ball characterization).
    """
    f_arr = as_vector(f)
    if op.decomposition is not None:
        a_part, l_part, p_part = op.decomposition
        a_op = OperatorA(apply=lambda u: as_vector(a_part(u)), name="A")
        phi = BiFunctional(
            value=lambda eta, v: inner(as_vector(l_part(eta)), v),
            v_subgradient=lambda eta, v: as_vector(l_part(eta)),
            alpha_phi=None,
            name="linear_slot")
        # value below is exact for linear P (the only decomposed case in scope)
        j = LipschitzFunctional(
            value=lambda u: 0.5 * inner(as_vector(p_part(u)), u),
            clarke_dd=lambda u, v: inner(as_vector(p_part(u)), v),
            subgradient=lambda u: as_vector(p_part(u)),
            regular=True,
            name="P_slot")
    else:
        a_op = OperatorA(apply=lambda u: as_vector(op.T(u)), name=op.name)
        phi = zero_bifunctional()
        from .clarke import zero_functional
        j = zero_functional(dim)

    res = (lambda u: float(norm(as_vector(op.T(u)) - f_arr))) if exact_hooks else None
    return VhiProblem(space=SpaceDescriptor(dim), K=whole_space(dim),
                      A=a_op, phi=phi, j=j, f=f_arr,
                      exact_residual=res, name=f"equation[{op.name}]")


def ball_membership(op: EquationOperator, f, u, epsilon: float) -> bool:
    """u lies in Omega(epsilon) of the induced problem iff T u lands in the
    closed ball of radius epsilon around f."""
    if epsilon <= 0:
        raise VhiError("ball_membership: epsilon must be > 0")
    return norm(as_vector(op.T(as_vector(u))) - as_vector(f)) <= epsilon


def solve_equation(op: EquationOperator, f, method: str = "bisection_1d",
                   tol: float = 1e-10, lo: float = -50.0, hi: float = 50.0,
                   max_iter: int = 200_000, seed: int = 0) -> SolveReport:
    """Solve T u = f to ||T u - f|| <= tol.

    ``bisection_1d`` scans [lo, hi] for a sign change and bisects (1-D
    only); ``damped_iteration`` runs u <- u + rho (f - T u) with rho from
    sampled monotonicity/Lipschitz quotients of T.
    """
    f_arr = as_vector(f)
    if method == "bisection_1d":
        if f_arr.size != 1:
            raise VhiError("bisection_1d requires a 1-D equation")
        h = lambda x: float(as_vector(op.T(np.array([x])))[0] - f_arr[0])  # noqa: E731
        grid = np.linspace(lo, hi, 4097)
        vals = np.array([h(x) for x in grid])
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        hit = np.nonzero(np.abs(vals) <= tol)[0]
        if len(hit):
            x = float(grid[hit[0]])
            return SolveReport(solutions=[np.array([x])],
                               residuals=[abs(h(x))], iterations=len(grid),
                               converged=True, method=method)
        if not len(idx):
            raise SolverFailure("bisection_1d: no sign-change bracket in "
                                f"[{lo}, {hi}]")
        a, b = float(grid[idx[0]]), float(grid[idx[0] + 1])
        fa = h(a)
        it = 0
        while it < 200:
            m = 0.5 * (a + b)
            fm = h(m)
            it += 1
            if abs(fm) <= tol or (b - a) < 1e-15:
                return SolveReport(solutions=[np.array([m])],
                                   residuals=[abs(fm)],
                                   iterations=len(grid) + it, converged=True,
                                   method=method)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        raise SolverFailure("bisection_1d: failed to reach tolerance")

    if method == "damped_iteration":
        dim = f_arr.size
        t_map = lambda u: as_vector(op.T(u))  # noqa: E731
        rng = np.random.default_rng(seed)
        m_est, l_est = math.inf, 1e-12
        scale = max(1.0, norm(f_arr))
        for _ in range(32):
            x = rng.normal(scale=scale, size=dim)
            y = x + rng.normal(scale=0.1 * scale, size=dim)
            d = norm(x - y)
            if d == 0:
                continue
            dt = t_map(x) - t_map(y)
            l_est = max(l_est, norm(dt) / d)
            m_est = min(m_est, inner(dt, x - y) / d ** 2)
        if not math.isfinite(m_est) or m_est <= 0:
            raise SolverFailure("damped_iteration: T is not strongly monotone "
                                "on samples")
        rho = m_est / l_est ** 2
        u = np.zeros(dim)
        for it in range(1, max_iter + 1):
            r = f_arr - t_map(u)
            if norm(r) <= tol:
                return SolveReport(solutions=[u], residuals=[norm(r)],
                                   iterations=it, converged=True, method=method)
            u = u + rho * r
            if norm(u) > 1e6:
                raise DivergenceError("damped_iteration: norm blow-up")
        raise SolverFailure(f"damped_iteration: no convergence in {max_iter} steps")

    raise VhiError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# continuity probe for the equation route

@dataclass
class ProbeRow:
    f: np.ndarray
    solved: bool
    modulus: Optional[float]
    interval_found: bool
    suspect: bool
    note: str = ""


@dataclass
class ProbeReport:
    rows: List[ProbeRow]

    @property
    def suspect(self) -> bool:
        return any(r.suspect for r in self.rows)

    @property
    def max_modulus(self) -> Optional[float]:
        vals = [r.modulus for r in self.rows if r.modulus is not None]
        return max(vals) if vals else None


def equation_wellposed_probe(op: EquationOperator, f_samples: Sequence,
                             delta: float = 1e-4, tol: float = 1e-8,
                             lo: float = -50.0, hi: float = 50.0,
                             grid_step: float = 1e-3) -> ProbeReport:
    """Finite continuity-modulus probe of the solution map f -> u(f).

    For each load sample, solves T u = f and T u = f + delta * e_i and
    reports the largest displacement ratio.  A row turns SUSPECT when a
    solve fails (non-surjectivity witness), when the ratio exceeds 1/tol,
    or when the 1-D grid scan finds a solution *interval* (non-uniqueness).
    Failures are findings, not errors.
    """
    rows: List[ProbeRow] = []
    for f in f_samples:
        f_arr = as_vector(f)
        dim = f_arr.size
        method = "bisection_1d" if dim == 1 else "damped_iteration"
        interval_found = False
        try:
            base = solve_equation(op, f_arr, method=method, tol=tol, lo=lo, hi=hi)
            u0 = base.solutions[0]
        except SolverFailure as exc:
            rows.append(ProbeRow(f=f_arr, solved=False, modulus=None,
                                 interval_found=False, suspect=True,
                                 note=str(exc)))
            continue
        if dim == 1:
            scan = solve_1d_grid(equation_problem(op, f_arr, 1),
                                 lo=lo, hi=hi, step=grid_step)
            interval_found = bool(scan.intervals)
        worst = 0.0
        ok = True
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = delta
            try:
                shifted = solve_equation(op, f_arr + e, method=method, tol=tol,
                                         lo=lo, hi=hi)
            except SolverFailure:
                ok = False
                break
            worst = max(worst, norm(shifted.solutions[0] - u0) / delta)
        suspect = (not ok) or interval_found or worst > 1.0 / tol
        rows.append(ProbeRow(f=f_arr, solved=ok, modulus=worst if ok else None,
                             interval_found=interval_found, suspect=suspect))
    return ProbeReport(rows=rows)
