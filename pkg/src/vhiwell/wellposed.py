"""Slack-set machinery and well-posedness diagnostics.

For a problem and a defect level eps > 0 the slack set is

    Omega(eps) = { u in K :  gap(u, v) >= -eps * ||u - v||   for all v in K },

where ``gap`` is the left-hand side of the inequality.  The solution set S
is the intersection of all Omega(eps), so S is contained in every Omega(eps).
The central diagnosis criterion: the problem is well-posed (unique solution,
every approximating sequence converges to it) exactly when the slack sets
are nonempty for every eps and their diameter tends to zero.

This module provides the residual of a point (the smallest eps admitting
it), slack-set membership, diameter estimation, diameter sweeps with a
verdict, approximating-sequence constructors, and the residual-to-error
certificate available under the smallness condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InfeasiblePoint, MissingData, SolverFailure, VhiError
from .problem import VhiProblem, gap, smallness_margin
from .space import as_vector, norm


# --------------------------------------------------------------------------
# candidate directions / test points

@dataclass(frozen=True)
class DirectionSampler:
    """Deterministic stream of feasible test points v around a base point.

    Directions: the +-coordinate axes, ``count`` seeded random unit
    directions, and (when the problem exposes the needed selections) the
    steepest-descent direction of the linearized gap, which makes membership
    verdicts exact for equation-type problems.  Each direction is probed at
    every scale in ``scales`` and projected into K.
    """

    count: int = 128
    seed: int = 0
    scales: Tuple[float, ...] = (1.0, 1e-2, 1e-4, 1e-6)
    include_axes: bool = True
    include_steepest: bool = True

    def directions(self, problem: VhiProblem, u: np.ndarray) -> np.ndarray:
        dim = problem.dim
        if dim == 1:
            # every unit direction is one of these two
            return np.array([[1.0], [-1.0]])
        rows: List[np.ndarray] = []
        if self.include_axes:
            eye = np.eye(dim)
            rows.extend(eye)
            rows.extend(-eye)
        if self.count > 0:
            rng = np.random.default_rng(self.seed)
            raw = rng.normal(size=(self.count, dim))
            lens = np.linalg.norm(raw, axis=1)
            lens[lens == 0] = 1.0
            rows.extend(raw / lens[:, None])
        if self.include_steepest:
            g = as_vector(problem.A.apply(u)) - problem.f
            if problem.j.subgradient is not None:
                g = g + as_vector(problem.j.subgradient(u))
            if not problem.phi.is_zero and problem.phi.v_subgradient is not None:
                g = g + as_vector(problem.phi.v_subgradient(u, u))
            n = np.linalg.norm(g)
            if n > 0:
                rows.append(-g / n)
                rows.append(g / n)
        return np.asarray(rows)

    def test_points(self, problem: VhiProblem, u: np.ndarray) -> Iterable[np.ndarray]:
        for d in self.directions(problem, u):
            for t in self.scales:
                v = problem.K.project(u + t * d)
                if np.any(v != u):
                    yield v


_DEFAULT_SAMPLER = DirectionSampler()


# --------------------------------------------------------------------------
# residual and membership

def residual(problem: VhiProblem, u, sampler: Optional[DirectionSampler] = None) -> float:
    """Smallest eps such that u belongs to Omega(eps):

        sup over feasible v != u of  max(-gap(u, v), 0) / ||u - v||.

    Exact when the problem carries a closed-form residual hook; otherwise a
    sampled lower estimate over the direction stream.
    """
    u = as_vector(u)
    if not problem.K.contains(u):
        raise InfeasiblePoint("residual: point is not feasible")
    if problem.exact_residual is not None:
        return float(problem.exact_residual(u))
    sampler = sampler or _DEFAULT_SAMPLER
    best = 0.0
    for v in sampler.test_points(problem, u):
        g = gap(problem, u, v, check_feasible=False)
        if g < 0.0:
            q = -g / norm(v - u)
            if q > best:
                best = q
    return best


def omega_member(problem: VhiProblem, u, epsilon: float,
                 sampler: Optional[DirectionSampler] = None,
                 tol: float = 1e-10) -> bool:
    """Membership of u in Omega(epsilon).

    True iff gap(u, v) >= -epsilon * ||u - v|| - tol for every probed
    feasible v (exact, sampler-free, for problems with a closed-form
    residual).  The additive slack ``tol`` absorbs float error at interval
    endpoints.
    """
    if epsilon <= 0:
        raise VhiError("omega_member: epsilon must be > 0")
    u = as_vector(u)
    if not problem.K.contains(u):
        raise InfeasiblePoint("omega_member: point is not feasible")
    if problem.exact_residual is not None:
        return float(problem.exact_residual(u)) <= epsilon + tol
    sampler = sampler or _DEFAULT_SAMPLER
    for v in sampler.test_points(problem, u):
        if gap(problem, u, v, check_feasible=False) < -epsilon * norm(v - u) - tol:
            return False
    return True


# --------------------------------------------------------------------------
# diameter estimation

@dataclass
class OmegaEstimate:
    """Result of probing one slack set."""

    epsilon: float
    members: List[np.ndarray]
    diameter_lower: float
    diameter_upper: Optional[float]
    probes: int

    @property
    def empty(self) -> bool:
        return not self.members and (
            self.diameter_upper is None or self.diameter_upper == 0.0)

    @property
    def diameter(self) -> float:
        return self.diameter_upper if self.diameter_upper is not None \
            else self.diameter_lower


@dataclass(frozen=True)
class CandidateStream:
    """Deterministic candidate points for slack-set probing.

    1-D problems get a uniform grid over [lo, hi] plus local refinement
    around low-residual points; higher dimensions get a seeded uniform cloud
    with shrinking refinement rounds around the best candidates.
    """

    lo: float = -10.0
    hi: float = 10.0
    coarse: int = 2001
    refine_rounds: int = 3
    refine_count: int = 200
    seed: int = 0

    def points(self, problem: VhiProblem, epsilon: float,
               res: Callable[[np.ndarray], float]) -> List[np.ndarray]:
        dim = problem.dim
        if dim == 1:
            return self._points_1d(problem, epsilon, res)
        return self._points_nd(problem, epsilon, res)

    def _points_1d(self, problem, epsilon, res):
        xs = np.linspace(self.lo, self.hi, self.coarse)
        step = xs[1] - xs[0]
        pts = [problem.K.project(np.array([x])) for x in xs]
        values = np.array([res(p) for p in pts])
        # the residual is Lipschitz along the grid, so any true member lies
        # near a coarse point whose residual is within C*step of epsilon
        slopes = np.abs(np.diff(values)) / step
        c = max(1.0, float(slopes.max())) if len(values) > 1 else 1.0
        near = values <= epsilon + c * step
        out = list(pts)
        # refine only at the ends of each near-run: that is where slack-set
        # boundaries (or whole tiny slack sets) live
        windows = []
        i = 0
        n = len(xs)
        while i < n:
            if not near[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and near[j + 1]:
                j += 1
            windows.append(xs[i])
            if j != i:
                windows.append(xs[j])
            i = j + 1
        fine_step = max(min(epsilon / 4.0, step / 4.0), step / 4096.0)
        for center in windows:
            lo = max(self.lo, center - step)
            hi = min(self.hi, center + step)
            m = max(3, int((hi - lo) / fine_step) + 1)
            for x in np.linspace(lo, hi, m):
                out.append(problem.K.project(np.array([x])))
        return out

    def _points_nd(self, problem, epsilon, res):
        rng = np.random.default_rng(self.seed)
        dim = problem.dim
        cloud = self.lo + rng.random((self.coarse, dim)) * (self.hi - self.lo)
        pts = [problem.K.project(c) for c in cloud]
        out = list(pts)
        radius = 0.25 * (self.hi - self.lo)
        for _ in range(self.refine_rounds):
            scored = sorted(out, key=res)[:max(4, self.refine_count // 8)]
            for base in scored:
                local = base + rng.normal(scale=radius, size=(
                    self.refine_count // max(1, len(scored)), dim))
                out.extend(problem.K.project(c) for c in local)
            radius *= 0.25
        return out


def omega_diameter(problem: VhiProblem, epsilon: float,
                   candidates: Optional[CandidateStream] = None,
                   tol: float = 1e-10,
                   sampler: Optional[DirectionSampler] = None,
                   max_members: int = 4096) -> OmegaEstimate:
    """Probe Omega(epsilon): collect members from the candidate stream and
    report the largest pairwise distance found (a lower diameter estimate).
    Problems with a closed-form slack-set hook also get the analytic
    diameter as ``diameter_upper``.

    An empty member list yields diameter_lower = 0 with the estimate flagged
    empty; that is a finding, not an error.
    """
    if epsilon <= 0:
        raise VhiError("omega_diameter: epsilon must be > 0")
    res = problem.exact_residual
    if res is None:
        samp = sampler or _DEFAULT_SAMPLER
        res = lambda u: residual(problem, u, samp)  # noqa: E731

    upper = None
    members: List[np.ndarray] = []
    probes = 0
    if problem.omega_intervals is not None:
        intervals = problem.omega_intervals(epsilon)
        if intervals:
            lo = min(a for a, _ in intervals)
            hi = max(b for _, b in intervals)
            upper = hi - lo
            # interval endpoints and interior fill are certified members
            for a, b in intervals:
                for x in np.linspace(a, b, 9):
                    probes += 1
                    pt = np.array([x])
                    if res(pt) <= epsilon + tol:
                        members.append(pt)
        else:
            upper = 0.0
    else:
        stream = candidates or CandidateStream()
        for pt in stream.points(problem, epsilon, res):
            probes += 1
            if res(pt) <= epsilon + tol:
                members.append(pt)
                if len(members) >= max_members:
                    break

    lower = 0.0
    if members:
        arr = np.asarray(members)
        # max pairwise distance; extremes dominate, do it blockwise
        for i in range(len(arr)):
            d = np.linalg.norm(arr[i + 1:] - arr[i], axis=1) if i + 1 < len(arr) else ()
            if len(d):
                lower = max(lower, float(np.max(d)))
    return OmegaEstimate(epsilon=epsilon, members=members,
                         diameter_lower=lower, diameter_upper=upper,
                         probes=probes)


# --------------------------------------------------------------------------
# diameter sweep and diagnosis

VERDICT_WELL_POSED = "WELL_POSED_CANDIDATE"
VERDICT_NOT_WELL_POSED = "NOT_WELL_POSED"
VERDICT_EMPTY = "EMPTY_SLACK_SET"


@dataclass
class SweepRow:
    epsilon: float
    members_found: int
    diameter_lower: float
    diameter_upper: Optional[float]

    @property
    def diameter(self) -> float:
        return self.diameter_upper if self.diameter_upper is not None \
            else self.diameter_lower


@dataclass
class SweepResult:
    """Diameter-vs-eps table plus the raw limit estimate and verdict.

    The verdict leans on declared hypothesis flags (closed K, pseudomonotone
    A, the sequential upper-limit property of phi, locally Lipschitz j); it
    certifies nothing beyond what those declarations plus the computed
    diameters support, which is why it is only ever a *candidate* verdict.
    """

    rows: List[SweepRow]
    limit: float
    monotone: bool
    verdict: str
    assumptions: dict = field(default_factory=dict)

    @property
    def well_posed(self) -> bool:
        return self.verdict == VERDICT_WELL_POSED


def diam_sweep(problem: VhiProblem, epsilons: Sequence[float],
               candidates: Optional[CandidateStream] = None,
               tol: float = 1e-3,
               sampler: Optional[DirectionSampler] = None) -> SweepResult:
    """Estimate diam(Omega(eps)) along a decreasing eps schedule and diagnose.

    Verdict WELL_POSED_CANDIDATE iff every slack set in the sweep is
    nonempty and the final diameter is <= tol; EMPTY_SLACK_SET when some
    slack set shows no members (solution existence fails or candidates
    missed it); NOT_WELL_POSED otherwise.
    """
    eps_list = [float(e) for e in epsilons]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise VhiError("diam_sweep: epsilons must be positive")
    if any(b > a for a, b in zip(eps_list, eps_list[1:])) and \
            any(b < a for a, b in zip(eps_list, eps_list[1:])):
        raise VhiError("diam_sweep: epsilons must be sorted")
    eps_list = sorted(eps_list, reverse=True)

    rows: List[SweepRow] = []
    any_empty = False
    for eps in eps_list:
        est = omega_diameter(problem, eps, candidates=candidates,
                             sampler=sampler)
        rows.append(SweepRow(eps, len(est.members), est.diameter_lower,
                             est.diameter_upper))
        if est.empty:
            any_empty = True

    diameters = [r.diameter for r in rows]
    limit = diameters[-1]
    monotone = all(b <= a + 1e-12 for a, b in zip(diameters, diameters[1:]))
    if any_empty:
        verdict = VERDICT_EMPTY
    elif limit <= tol:
        verdict = VERDICT_WELL_POSED
    else:
        verdict = VERDICT_NOT_WELL_POSED
    assumptions = {
        "K_closed": problem.K.is_closed,
        "A_pseudomonotone": problem.A.is_pseudomonotone,
        "phi_limsup_compatible": problem.phi.limsup_compatible,
        "j_locally_lipschitz": True,
    }
    return SweepResult(rows=rows, limit=limit, monotone=monotone,
                       verdict=verdict, assumptions=assumptions)


# --------------------------------------------------------------------------
# approximating sequences

@dataclass
class ApproxSequence:
    """Feasible points u_n with u_n in Omega(eps_n) and eps_n decreasing."""

    epsilons: List[float]
    points: List[np.ndarray]


def make_approx_sequence(problem: VhiProblem, epsilons: Sequence[float],
                         strategy: str = "closed_form",
                         solver: Optional[Callable] = None,
                         alternate: bool = False,
                         member_tol: float = 1e-9) -> ApproxSequence:
    """Construct an approximating sequence.

    Strategies:
      * ``closed_form``: endpoints of the analytic slack intervals (requires
        the problem hook).  ``alternate=True`` alternates between the left
        and right extremes: on an ill-posed problem this produces a
        non-convergent witness.
      * ``perturb_f``: u_n solves the problem with f replaced by f + delta_n,
        ||delta_n|| = eps_n; such a point always lies in Omega(eps_n).
        ``solver`` must map a problem to an accurate solution.
      * ``solver_residual``: run ``solver(problem, tol=eps_n/2)``.

    Every point is verified by membership at its eps before being accepted.
    """
    eps_list = [float(e) for e in epsilons]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise VhiError("epsilons must be positive")
    if any(b > a for a, b in zip(eps_list, eps_list[1:])):
        raise VhiError("epsilons must be nonincreasing")

    points: List[np.ndarray] = []
    for n, eps in enumerate(eps_list):
        if strategy == "closed_form":
            if problem.omega_intervals is None:
                raise MissingData("closed_form strategy needs the slack-set hook")
            intervals = problem.omega_intervals(eps)
            if not intervals:
                raise SolverFailure(f"slack set empty at eps={eps}")
            lo = min(a for a, _ in intervals)
            hi = max(b for _, b in intervals)
            x = lo if (alternate and n % 2 == 0) else hi
            pt = np.array([x])
        elif strategy == "perturb_f":
            if solver is None:
                raise MissingData("perturb_f strategy needs a solver")
            delta = np.zeros(problem.dim)
            delta[0] = eps
            pt = as_vector(solver(problem.replace(f=problem.f + delta)))
        elif strategy == "solver_residual":
            if solver is None:
                raise MissingData("solver_residual strategy needs a solver")
            pt = as_vector(solver(problem, tol=eps / 2.0))
        else:
            raise VhiError(f"unknown strategy {strategy!r}")
        if not problem.K.contains(pt):
            raise InfeasiblePoint(f"strategy produced infeasible point {pt}")
        if not omega_member(problem, pt, eps, tol=member_tol):
            raise SolverFailure(
                f"constructed point {pt} failed membership at eps={eps}")
        points.append(pt)
    return ApproxSequence(epsilons=eps_list, points=points)


# --------------------------------------------------------------------------
# error certificate

def certify_error(problem: VhiProblem, epsilon: float) -> float:
    """A-posteriori bound: any point of Omega(epsilon) lies within
    epsilon / (m_A - alpha_phi - alpha_j) of the unique solution, provided
    the smallness margin is positive."""
    if epsilon < 0:
        raise VhiError("certify_error: epsilon must be >= 0")
    margin = smallness_margin(problem)
    if margin is None:
        raise MissingData("certify_error: m_A, alpha_phi, alpha_j must be declared")
    if margin <= 0:
        raise VhiError(f"certify_error: smallness margin {margin} is not positive")
    return epsilon / margin
