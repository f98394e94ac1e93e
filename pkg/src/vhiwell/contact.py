"""Discrete frictional contact model with normal compliance and unilateral
constraint.

The body is reduced to N contact nodes coupled by a symmetric
positive-definite stiffness map.  Each node carries one normal displacement
u_nu and a tangential displacement vector u_tau (SI units: displacements in
m, forces in N, stiffness in N/m).  The foundation is a rigid body covered
by a deformable layer of thickness k - g:

* penetration beyond the gap g activates the normal compliance p(u_nu - g),
  whose potential q(r) = integral of p accumulates into the nonsmooth energy
  term (q may be nonconvex when p is nonmonotone);
* the normal displacement cannot exceed the thickness bound, u_nu <= k,
  which is the unilateral constraint set K;
* sliding is resisted by the friction bound F(u_nu - g) multiplying the
  tangential displacement norm (the convex, nondifferentiable term);
* the constitutive law contributes the stiffness force plus an optional
  locking term omega * (e - P_B e), the projection residue of the strain
  surrogate e onto a convex region B containing 0.  Here the strain
  surrogate is the per-node elongation vector, i.e. the displacement itself
  (each node is anchored; couplings enter through the stiffness matrix),
  which keeps the locking term monotone and nonexpansive.

The trace map selecting contact degrees of freedom is the identity on this
model, so its operator norm gamma is exactly 1; it is kept symbolic in all
constant formulas.  Quadrature weights of the contact-boundary integrals are
lumped to 1 per node (weights only rescale constants).

Assembly produces a problem whose declared constants

    m_A = m_F (stiffness alone; the locking term is monotone but is not
               credited with extra coercivity),
    alpha_phi = L_F * gamma^2,       alpha_j = L_p * gamma^2,

satisfy the smallness condition whenever (L_F + L_p) * gamma^2 < m_F, and
the gap-perturbation constants

    b_n = L_F * gamma * ||g_n - g||,   c_n = L_p * gamma * ||g_n - g||

feed the perturbation experiments.  With zero stiffness and zero loads the
problem degenerates: every point of {v in K : v in B, v_nu <= g} solves it,
which is the stock ill-posedness witness.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .clarke import LipschitzFunctional
from .errors import MissingData, SolverFailure, VhiError
from .perturb import PerturbationSchedule, perturbation_experiment
from .problem import (BiFunctional, ConstraintSet, OperatorA, VhiProblem)
from .space import SpaceDescriptor, as_vector, norm


# --------------------------------------------------------------------------
# scalar contact laws

@dataclass(frozen=True)
class FrictionBound:
    """Friction bound F: Lipschitz, nonnegative, F(r) = 0 for r <= 0."""

    fn: Callable[[float], float]
    lipschitz: float
    name: str = "F"

    def __call__(self, r: float) -> float:
        return self.fn(r)


@dataclass(frozen=True)
class CompliancePotential:
    """Normal compliance p with its closed-form potential q(r) = int_0^r p.

    p is Lipschitz with p(r) = 0 for r <= 0, hence q(r) = 0 for r <= 0 and
    q is C^1 with q' = p.  q is convex iff p is nondecreasing; the
    nonmonotone laws below give a genuinely nonconvex potential.
    """

    p: Callable[[float], float]
    q: Callable[[float], float]
    lipschitz: float
    name: str = "p"

    def __call__(self, r: float) -> float:
        return self.p(r)


def friction_linear(slope: float) -> FrictionBound:
    return FrictionBound(fn=lambda r: slope * np.maximum(r, 0.0),
                         lipschitz=slope, name=f"linear({slope:g})")


def friction_clamped(slope: float, cap: float) -> FrictionBound:
    return FrictionBound(fn=lambda r: np.minimum(slope * np.maximum(r, 0.0), cap),
                         lipschitz=slope, name=f"clamped({slope:g},{cap:g})")


def compliance_linear(slope: float) -> CompliancePotential:
    return CompliancePotential(
        p=lambda r: slope * np.maximum(r, 0.0),
        q=lambda r: 0.5 * slope * np.maximum(r, 0.0) ** 2,
        lipschitz=slope, name=f"linear({slope:g})")


def compliance_clamped(slope: float, cap: float) -> CompliancePotential:
    r_cap = cap / slope

    def p(r):
        return np.minimum(slope * np.maximum(r, 0.0), cap)

    def q(r):
        r = np.maximum(r, 0.0)
        return np.where(r <= r_cap, 0.5 * slope * r * r,
                        0.5 * slope * r_cap ** 2 + cap * (r - r_cap))

    return CompliancePotential(p=p, q=q, lipschitz=slope,
                               name=f"clamped({slope:g},{cap:g})")


def compliance_hump(slope: float = 1.0) -> CompliancePotential:
    """Nonmonotone compliance: rises to slope*1 at r=1, falls back to
    slope*0.5 at r=1.5, then stays flat.  Its potential is nonconvex."""

    def p(r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= 1.0, slope * np.maximum(r, 0.0),
                       np.where(r <= 1.5, slope * (2.0 - r), 0.5 * slope))
        return out if out.ndim else float(out)

    q1 = 0.5 * slope                     # q(1)
    q15 = q1 + slope * (2.0 * 0.5 - 0.5 * (1.5 ** 2 - 1.0))  # q(1.5)

    def q(r):
        r = np.asarray(r, dtype=float)
        rc = np.maximum(r, 0.0)
        out = np.where(
            rc <= 1.0, 0.5 * slope * rc * rc,
            np.where(rc <= 1.5,
                     q1 + slope * (2.0 * (rc - 1.0) - 0.5 * (rc * rc - 1.0)),
                     q15 + 0.5 * slope * (rc - 1.5)))
        return out if out.ndim else float(out)

    return CompliancePotential(p=p, q=q, lipschitz=slope,
                               name=f"hump({slope:g})")


COMPLIANCE_LAWS = {
    "linear": compliance_linear,
    "clamped": compliance_clamped,
    "hump": compliance_hump,
}
FRICTION_LAWS = {
    "linear": friction_linear,
    "clamped": friction_clamped,
}


# --------------------------------------------------------------------------
# locking regions

@dataclass(frozen=True)
class BoxRegion:
    lo: float
    hi: float

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def sample(self, rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
        return self.lo + rng.random((count, dim)) * (self.hi - self.lo)


@dataclass(frozen=True)
class BallRegion:
    radius: float

    def project(self, x: np.ndarray) -> np.ndarray:
        n = np.linalg.norm(x)
        if n <= self.radius:
            return np.asarray(x, dtype=float)
        return x * (self.radius / n)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def sample(self, rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
        d = rng.normal(size=(count, dim))
        lens = np.linalg.norm(d, axis=1, keepdims=True)
        lens[lens == 0] = 1.0
        radii = self.radius * rng.random((count, 1)) ** (1.0 / dim)
        return d / lens * radii


# --------------------------------------------------------------------------
# model

@dataclass(frozen=True)
class ContactModel:
    n_nodes: int
    stiffness: np.ndarray
    compliance: CompliancePotential
    friction: FrictionBound
    g: np.ndarray
    k: np.ndarray
    f0: np.ndarray
    f2: np.ndarray
    region: BoxRegion | BallRegion = BoxRegion(-math.inf, math.inf)
    omega: np.ndarray | float = 0.0
    tangential_dim: int = 1

    def __post_init__(self):
        if self.n_nodes < 1:
            raise VhiError("need at least one contact node")
        if self.tangential_dim < 1:
            raise VhiError("tangential_dim must be >= 1")
        dim = self.dim
        s = np.asarray(self.stiffness, dtype=float)
        if s.shape != (dim, dim):
            raise VhiError(f"stiffness must be {dim}x{dim}, got {s.shape}")
        if not np.allclose(s, s.T, atol=1e-9):
            raise VhiError("stiffness must be symmetric")
        object.__setattr__(self, "stiffness", s)
        g = np.broadcast_to(np.asarray(self.g, dtype=float), (self.n_nodes,)).copy()
        k = np.broadcast_to(np.asarray(self.k, dtype=float), (self.n_nodes,)).copy()
        if np.any(g < 0) or np.any(g > k):
            raise VhiError("gap must satisfy 0 <= g <= k nodewise")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "k", k)
        om = np.broadcast_to(np.asarray(self.omega, dtype=float), (dim,)).copy()
        if np.any(om < 0):
            raise VhiError("locking weights must be >= 0")
        if isinstance(self.region, BallRegion) and np.ptp(om) > 1e-12:
            raise VhiError("ball locking region needs a constant weight")
        object.__setattr__(self, "omega", om)
        if not self.region.contains(np.zeros(dim)):
            raise VhiError("locking region must contain 0")
        for name in ("f0", "f2"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float),
                                  (dim,)).copy()
            object.__setattr__(self, name, arr)

    # ----- layout ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.n_nodes * (1 + self.tangential_dim)

    @property
    def normal_indices(self) -> np.ndarray:
        return np.arange(self.n_nodes) * (1 + self.tangential_dim)

    def tangential_slice(self, i: int) -> slice:
        base = i * (1 + self.tangential_dim)
        return slice(base + 1, base + 1 + self.tangential_dim)

    # ----- declared constants ----------------------------------------------

    @property
    def m_F(self) -> float:
        return float(np.linalg.eigvalsh(self.stiffness)[0])

    @property
    def gamma_norm(self) -> float:
        # contact-DOF selection is the identity here: operator norm 1
        return 1.0

    @property
    def smallness_ok(self) -> bool:
        return (self.friction.lipschitz + self.compliance.lipschitz) \
            * self.gamma_norm ** 2 < self.m_F

    @property
    def load(self) -> np.ndarray:
        return self.f0 + self.f2

    def replace(self, **kw) -> "ContactModel":
        return dataclasses.replace(self, **kw)


# --------------------------------------------------------------------------
# assembly

@dataclass(frozen=True)
class AssembledConstants:
    m_A: float
    alpha_phi: float
    alpha_j: float

    @property
    def margin(self) -> float:
        return self.m_A - self.alpha_phi - self.alpha_j


def declared_constants(model: ContactModel) -> AssembledConstants:
    gam2 = model.gamma_norm ** 2
    return AssembledConstants(m_A=model.m_F,
                              alpha_phi=model.friction.lipschitz * gam2,
                              alpha_j=model.compliance.lipschitz * gam2)


def _constraint_set(model: ContactModel) -> ConstraintSet:
    dim = model.dim
    hi = np.full(dim, np.inf)
    hi[model.normal_indices] = model.k

    def contains(v):
        v = as_vector(v)
        return bool(np.all(v[model.normal_indices] <= model.k + 1e-12))

    def project(v):
        v = as_vector(v).copy()
        ni = model.normal_indices
        v[ni] = np.minimum(v[ni], model.k)
        return v

    def sample(count, seed):
        rng = np.random.default_rng(seed)
        return [project(rng.normal(scale=2.0, size=dim)) for _ in range(count)]

    return ConstraintSet(contains=contains, project=project,
                         sample_feasible=sample, name="thickness_caps")


def _exact_residual(model: ContactModel, apply_a, f: np.ndarray
                    ) -> Callable[[np.ndarray], float]:
    # The defect ratio is maximized in the small-step limit (phi(u, .) is
    # convex), so the residual reduces to the norm of the blockwise steepest
    # feasible ascent coefficients of the linearized defect.
    p_law, f_law = model.compliance, model.friction
    n, width = model.n_nodes, 1 + model.tangential_dim

    def res(u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        r = f - apply_a(u)
        uu = u.reshape(n, width)
        rr = r.reshape(n, width)
        pen = uu[:, 0] - model.g
        a = rr[:, 0] - p_law(pen)
        active = uu[:, 0] >= model.k - 1e-12         # cap active: push-in only
        coef_n = np.where(active, np.maximum(-a, 0.0), np.abs(a))
        fb = f_law(pen)
        ut, rt = uu[:, 1:], rr[:, 1:]
        un = np.linalg.norm(ut, axis=1)
        moving = un > 0.0
        safe = np.where(moving, un, 1.0)
        coef_t = np.where(
            moving,
            np.linalg.norm(rt - (fb / safe)[:, None] * ut, axis=1),
            np.maximum(np.linalg.norm(rt, axis=1) - fb, 0.0))
        return math.sqrt(float(coef_n @ coef_n + coef_t @ coef_t))

    return res


def assemble(model: ContactModel, allow_degenerate: bool = False) -> VhiProblem:
    """Build the inequality problem of the contact model.

    Raises unless the stiffness is positive definite and the smallness
    condition (L_F + L_p) * gamma^2 < m_F holds; pass ``allow_degenerate``
    for deliberately singular models (the ill-posedness demo).
    """
    m_f = model.m_F
    if not allow_degenerate:
        if m_f <= 0:
            raise VhiError(f"stiffness is not positive definite (m_F={m_f:g})")
        if not model.smallness_ok:
            raise VhiError(
                "smallness violated: (L_F + L_p) * gamma^2 = "
                f"{(model.friction.lipschitz + model.compliance.lipschitz) * model.gamma_norm ** 2:g}"
                f" >= m_F = {m_f:g}")
    consts = declared_constants(model)
    dim = model.dim
    s = model.stiffness
    om = model.omega
    region = model.region
    ni = model.normal_indices
    p_law, f_law = model.compliance, model.friction
    n_nodes, width = model.n_nodes, 1 + model.tangential_dim

    def apply_a(u):
        u = np.asarray(u, dtype=float)
        return s @ u + om * (u - region.project(u))

    def _tangent_norms(v):
        return np.linalg.norm(v.reshape(n_nodes, width)[:, 1:], axis=1)

    def phi_value(eta, v):
        eta = np.asarray(eta, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(f_law(eta[ni] - model.g) @ _tangent_norms(v))

    def phi_v_subgradient(eta, v):
        eta = np.asarray(eta, dtype=float)
        v = np.asarray(v, dtype=float)
        vv = v.reshape(n_nodes, width)
        norms = np.linalg.norm(vv[:, 1:], axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        scale = np.where(norms > 0.0, f_law(eta[ni] - model.g) / safe, 0.0)
        out = np.zeros((n_nodes, width))
        out[:, 1:] = scale[:, None] * vv[:, 1:]
        return out.reshape(dim)

    def j_value(v):
        v = np.asarray(v, dtype=float)
        return float(np.sum(p_law.q(v[ni] - model.g)))

    def j_dd(u, w):
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        return float(p_law(u[ni] - model.g) @ w[ni])

    def j_subgradient(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(dim)
        out[ni] = p_law(u[ni] - model.g)
        return out

    f = model.load
    problem = VhiProblem(
        space=SpaceDescriptor(dim),
        K=_constraint_set(model),
        A=OperatorA(apply=apply_a, m_A=m_f if m_f > 0 else None,
                    is_pseudomonotone=True, name="stiffness+locking"),
        phi=BiFunctional(value=phi_value, alpha_phi=consts.alpha_phi,
                         v_subgradient=phi_v_subgradient, name="friction"),
        j=LipschitzFunctional(value=j_value, clarke_dd=j_dd,
                              subgradient=j_subgradient,
                              alpha_j=consts.alpha_j, regular=True,
                              name="compliance"),
        f=f,
        exact_residual=None,
        name="contact",
    )
    return problem.replace(exact_residual=_exact_residual(model, apply_a, f))


# --------------------------------------------------------------------------
# gap perturbations

def gap_perturbation_bounds(model: ContactModel, g_new) -> Tuple[float, float]:
    """Deviation constants of the gap-perturbed friction / compliance terms:
    (L_F * gamma * ||g_new - g||,  L_p * gamma * ||g_new - g||)."""
    g_new = np.broadcast_to(np.asarray(g_new, dtype=float),
                            (model.n_nodes,)).copy()
    if np.any(g_new < 0) or np.any(g_new > model.k):
        raise VhiError("perturbed gap must satisfy 0 <= g_n <= k")
    d = float(np.linalg.norm(g_new - model.g))
    return (model.friction.lipschitz * model.gamma_norm * d,
            model.compliance.lipschitz * model.gamma_norm * d)


def gap_schedule(model: ContactModel, g_seq: Sequence) -> PerturbationSchedule:
    """Perturbation schedule moving only the gap function."""
    base = assemble(model)
    perturbed_models = [model.replace(g=np.broadcast_to(
        np.asarray(gn, dtype=float), (model.n_nodes,)).copy()) for gn in g_seq]
    bounds = [gap_perturbation_bounds(model, m.g) for m in perturbed_models]
    problems = [assemble(m) for m in perturbed_models]
    return PerturbationSchedule(
        base=base,
        phi_n=[p.phi for p in problems],
        j_n=[p.j for p in problems],
        f_n=[base.f] * len(problems),
        b_n=[b for b, _ in bounds],
        c_n=[c for _, c in bounds],
        problem_n=lambda n: problems[n])


def load_schedule(model: ContactModel, f0_seq: Sequence) -> PerturbationSchedule:
    """Perturbation schedule moving only the body-force load."""
    base = assemble(model)
    models = [model.replace(f0=np.broadcast_to(
        np.asarray(fn, dtype=float), (model.dim,)).copy()) for fn in f0_seq]
    problems = [assemble(m) for m in models]
    return PerturbationSchedule(
        base=base,
        phi_n=[base.phi] * len(problems),
        j_n=[base.j] * len(problems),
        f_n=[p.f for p in problems],
        b_n=[0.0] * len(problems),
        c_n=[0.0] * len(problems),
        problem_n=lambda n: problems[n])


def contact_convergence_study(model: ContactModel,
                              schedule: PerturbationSchedule,
                              solver, reference=None, verify_pairs: int = 200):
    """Run the perturbation experiment for a contact schedule; the smallness
    margin must be positive so every error carries a certificate."""
    base = assemble(model)
    consts = declared_constants(model)
    if consts.margin <= 0:
        raise VhiError("convergence study needs a positive smallness margin")
    if reference is None:
        reference = solver(base)
    return perturbation_experiment(schedule, solver, reference=reference,
                                   verify_pairs=verify_pairs)


# --------------------------------------------------------------------------
# ill-posedness witness

@dataclass
class WitnessReport:
    points: List[np.ndarray]
    residuals: List[float]

    @property
    def count(self) -> int:
        return len(self.points)


def illposed_witness(model: ContactModel, budget: int = 200, seed: int = 0,
                     tol: float = 1e-12, separation: float = 0.1
                     ) -> WitnessReport:
    """Exhibit non-uniqueness of the degenerate model (zero stiffness, zero
    loads): every point of {v in K : v in B, v_nu <= g} has zero defect.

    Samples the region, clamps normal components to the gap (the clamp
    cannot leave B since g >= 0), verifies zero residual, and returns 0 plus
    at least one distinct nonzero member.  Raises when the feasible core
    degenerates to {0}.
    """
    if np.max(np.abs(model.stiffness)) != 0.0:
        raise VhiError("ill-posedness witness needs zero stiffness")
    if np.any(model.load != 0.0):
        raise VhiError("ill-posedness witness needs zero loads")
    problem = assemble(model, allow_degenerate=True)
    rng = np.random.default_rng(seed)
    dim = model.dim
    ni = model.normal_indices

    def clamp_core(x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float).copy()
        y[ni] = np.minimum(y[ni], model.g)
        return y

    zero = np.zeros(dim)
    points: List[np.ndarray] = [zero]
    residuals: List[float] = [residual_of(problem, zero)]
    candidates = list(model.region.sample(rng, budget, dim))
    # deterministic probes: half-way extremes of the region along each axis
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        candidates.append(0.5 * model.region.project(10.0 * e))
    for cand in candidates:
        pt = clamp_core(cand)
        if not model.region.contains(pt):
            continue
        r = residual_of(problem, pt)
        if r > tol:
            continue
        if all(norm(pt - q) >= separation for q in points):
            points.append(pt)
            residuals.append(r)
        if len(points) >= 2 and any(norm(p) > 0 for p in points):
            break
    nonzero = [p for p in points if norm(p) > 0]
    if not nonzero:
        raise SolverFailure(
            "feasible core degenerates to {0}: no nonzero zero-defect point "
            "found within the budget")
    return WitnessReport(points=points, residuals=residuals)


def residual_of(problem: VhiProblem, u) -> float:
    from .wellposed import residual
    return residual(problem, u)
