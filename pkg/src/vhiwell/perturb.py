"""Data-perturbation experiments and solution-map continuity probes.

A perturbation schedule replaces (phi, j, f) by sequences (phi_n, j_n, f_n)
whose deviations from the base data are controlled by declared constants:

    phi_n(u,v) - phi_n(u,u) - phi(u,v) + phi(u,u) <= b_n ||u - v||,
    j_n0(u; v-u) - j0(u; v-u)                     <= c_n ||u - v||,

with b_n -> 0, c_n -> 0 and f_n -> f.  Solutions of the perturbed problems
then form an approximating sequence of the base problem with defect

    eps_n = b_n + c_n + ||f_n - f||,

so on a well-posed problem they converge to its solution; with a positive
smallness margin m the error is certified by eps_n / m at every step.

The declared b_n / c_n are *sample-verified* before an experiment is
declared valid (the bounds quantify over all pairs, so a falsification
attempt over random pairs is the best finite check); a violation aborts
with the offending pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .clarke import LipschitzFunctional
from .errors import BoundViolation, MissingData, VhiError
from .problem import BiFunctional, VhiProblem, smallness_margin
from .space import as_vector, norm
from .wellposed import certify_error


@dataclass
class PerturbationSchedule:
    """Perturbed data sequences with their declared deviation bounds.

    ``problem_n``, when given, builds the n-th perturbed problem directly
    (lets registry problems keep their closed-form hooks); otherwise the
    base problem is rebuilt with (phi_n, j_n, f_n) and stale hooks dropped.
    """

    base: VhiProblem
    phi_n: Sequence[BiFunctional]
    j_n: Sequence[LipschitzFunctional]
    f_n: Sequence[np.ndarray]
    b_n: Sequence[float]
    c_n: Sequence[float]
    problem_n: Optional[Callable[[int], VhiProblem]] = None

    def __post_init__(self):
        lens = {len(self.phi_n), len(self.j_n), len(self.f_n),
                len(self.b_n), len(self.c_n)}
        if len(lens) != 1:
            raise VhiError("schedule sequences must have equal length")
        if any(b < 0 for b in self.b_n) or any(c < 0 for c in self.c_n):
            raise VhiError("deviation bounds must be >= 0")

    def __len__(self):
        return len(self.f_n)

    def perturbed(self, n: int) -> VhiProblem:
        if self.problem_n is not None:
            return self.problem_n(n)
        return self.base.replace(
            phi=self.phi_n[n], j=self.j_n[n], f=as_vector(self.f_n[n]),
            exact_residual=None, omega_intervals=None,
            name=f"{self.base.name}[n={n}]")


def f_only_schedule(base: VhiProblem, f_seq: Sequence,
                    problem_n: Optional[Callable[[int], VhiProblem]] = None
                    ) -> PerturbationSchedule:
    """Schedule that only moves the load: b_n = c_n = 0."""
    f_list = [as_vector(f) for f in f_seq]
    steps = len(f_list)
    return PerturbationSchedule(
        base=base,
        phi_n=[base.phi] * steps,
        j_n=[base.j] * steps,
        f_n=f_list,
        b_n=[0.0] * steps,
        c_n=[0.0] * steps,
        problem_n=problem_n)


def epsilon_of_step(schedule: PerturbationSchedule, n: int) -> float:
    """Defect of step n: b_n + c_n + ||f_n - f||."""
    if not 0 <= n < len(schedule):
        raise VhiError(f"step {n} out of range [0, {len(schedule)})")
    return float(schedule.b_n[n] + schedule.c_n[n]
                 + norm(as_vector(schedule.f_n[n]) - schedule.base.f))


def verify_bounds(schedule: PerturbationSchedule, n: int,
                  pairs: int = 1000, seed: int = 0, scale: float = 3.0,
                  slack: float = 1e-9) -> None:
    """Sampled falsification of the declared b_n / c_n bounds at step n.

    Raises BoundViolation with the offending pair on failure.
    """
    base = schedule.base
    phi, phi_n = base.phi, schedule.phi_n[n]
    j, j_n = base.j, schedule.j_n[n]
    b, c = schedule.b_n[n], schedule.c_n[n]
    rng = np.random.default_rng(seed)
    dim = base.dim
    for _ in range(pairs):
        u = rng.normal(scale=scale, size=dim)
        v = rng.normal(scale=scale, size=dim)
        d = norm(u - v)
        if d == 0:
            continue
        lhs = (phi_n.value(u, v) - phi_n.value(u, u)
               - phi.value(u, v) + phi.value(u, u))
        if lhs > b * d + slack:
            raise BoundViolation(
                f"phi bound b_n={b:g} violated at step {n}: "
                f"excess {lhs - b * d:.3e}", pair=(u, v))
        lhs = j_n.clarke_dd(u, v - u) - j.clarke_dd(u, v - u)
        if lhs > c * d + slack:
            raise BoundViolation(
                f"j bound c_n={c:g} violated at step {n}: "
                f"excess {lhs - c * d:.3e}", pair=(u, v))


@dataclass
class ExperimentRow:
    n: int
    b_n: float
    c_n: float
    df_n: float
    eps_n: float
    error: float
    bound: Optional[float]
    passed: bool


@dataclass
class ExperimentTable:
    rows: List[ExperimentRow]
    reference: np.ndarray
    margin: Optional[float]
    passed: bool

    @property
    def errors(self) -> List[float]:
        return [r.error for r in self.rows]


def perturbation_experiment(schedule: PerturbationSchedule,
                            solver: Callable[[VhiProblem], np.ndarray],
                            reference: Optional[np.ndarray] = None,
                            verify_pairs: int = 1000,
                            seed: int = 0,
                            abs_tol: float = 1e-6) -> ExperimentTable:
    """Solve every perturbed problem and track convergence to the base
    solution.

    Per step: the solved u_n, the error ||u_n - u||, the defect eps_n, and,
    when the smallness margin is positive, the certified bound eps_n / m.
    The table passes when the final error is at most 10x the final bound
    (or at most ``abs_tol`` when no certificate is available).  Solver
    failures propagate: solvability of the perturbed problems is a
    precondition the experiment reports, not one it assumes away.
    """
    base = schedule.base
    if reference is None:
        reference = as_vector(solver(base))
    margin = smallness_margin(base)
    usable_margin = margin if (margin is not None and margin > 0) else None

    rows: List[ExperimentRow] = []
    for n in range(len(schedule)):
        verify_bounds(schedule, n, pairs=verify_pairs, seed=seed + n)
        u_n = as_vector(solver(schedule.perturbed(n)))
        eps_n = epsilon_of_step(schedule, n)
        err = norm(u_n - reference)
        bound = certify_error(base, eps_n) if usable_margin else None
        ok = err <= bound + 1e-9 if bound is not None else err <= abs_tol
        rows.append(ExperimentRow(
            n=n, b_n=float(schedule.b_n[n]), c_n=float(schedule.c_n[n]),
            df_n=float(norm(as_vector(schedule.f_n[n]) - base.f)),
            eps_n=eps_n, error=err, bound=bound, passed=ok))

    if rows and rows[-1].bound is not None:
        table_pass = rows[-1].error <= 10.0 * rows[-1].bound
    else:
        table_pass = bool(rows) and rows[-1].error <= abs_tol
    return ExperimentTable(rows=rows, reference=reference, margin=margin,
                           passed=table_pass)


# --------------------------------------------------------------------------
# continuity of the solution map

@dataclass
class ModulusRow:
    f: np.ndarray
    modulus: float


@dataclass
class ModulusTable:
    rows: List[ModulusRow]
    lipschitz_bound: Optional[float]

    @property
    def max_modulus(self) -> float:
        return max(r.modulus for r in self.rows)

    @property
    def within_lipschitz_bound(self) -> Optional[bool]:
        if self.lipschitz_bound is None:
            return None
        return self.max_modulus <= self.lipschitz_bound + 1e-9


def solution_map_probe(family: Callable[[np.ndarray], VhiProblem],
                       f_grid: Sequence,
                       solver: Callable[[VhiProblem], np.ndarray],
                       delta: float = 1e-4) -> ModulusTable:
    """Finite-difference continuity moduli of f -> u(f) over a load grid.

    For problems declaring a positive smallness margin the moduli are also
    compared against the Lipschitz bound 1/margin of the solution map.
    """
    rows: List[ModulusRow] = []
    lipschitz = None
    for f in f_grid:
        f_arr = as_vector(f) if np.ndim(f) else np.array([float(f)])
        prob = family(f_arr)
        margin = smallness_margin(prob)
        if margin is not None and margin > 0:
            lipschitz = 1.0 / margin
        u0 = as_vector(solver(prob))
        worst = 0.0
        for i in range(f_arr.size):
            e = np.zeros(f_arr.size)
            e[i] = delta
            u1 = as_vector(solver(family(f_arr + e)))
            worst = max(worst, norm(u1 - u0) / delta)
        rows.append(ModulusRow(f=f_arr, modulus=worst))
    return ModulusTable(rows=rows, lipschitz_bound=lipschitz)
