import numpy as np
import pytest

from vhiwell.clarke import estimate_alpha_j
from vhiwell.contact import (BallRegion, BoxRegion, ContactModel,
                             assemble, compliance_clamped, compliance_hump,
                             compliance_linear, contact_convergence_study,
                             declared_constants, friction_linear,
                             gap_perturbation_bounds, gap_schedule,
                             illposed_witness, load_schedule)
from vhiwell.errors import SolverFailure, VhiError
from vhiwell.perturb import epsilon_of_step
from vhiwell.problem import gap, smallness_margin
from vhiwell.registry import default_contact3, degenerate_contact
from vhiwell.solvers import solve_1d_grid, solve_strongly_monotone
from vhiwell.wellposed import diam_sweep, CandidateStream, omega_member, residual


def one_node(stiff=10.0, slope_p=1.0, cap_p=1.0, slope_f=0.1, g=0.0, k=1.0,
             region=None, omega=0.0, f0=(0.0, 0.0)):
    return ContactModel(
        n_nodes=1,
        stiffness=stiff * np.eye(2),
        compliance=compliance_clamped(slope_p, cap_p),
        friction=friction_linear(slope_f),
        g=np.array([g]), k=np.array([k]),
        f0=np.asarray(f0, dtype=float), f2=np.zeros(2),
        region=region or BoxRegion(-np.inf, np.inf),
        omega=omega)


def _solver(tol=1e-10):
    return lambda p: solve_strongly_monotone(p, tol=tol).solutions[0]


# --------------------------------------------------------------------------
# model validation and constants

def test_declared_constants_and_margin():
    model = one_node()
    consts = declared_constants(model)
    assert consts.m_A == pytest.approx(10.0)
    assert consts.alpha_phi == pytest.approx(0.1)
    assert consts.alpha_j == pytest.approx(1.0)
    assert consts.margin == pytest.approx(8.9)
    prob = assemble(model)
    assert smallness_margin(prob) == pytest.approx(8.9)


def test_model_validation():
    with pytest.raises(VhiError):
        one_node(g=2.0, k=1.0)                       # g > k
    with pytest.raises(VhiError):
        one_node(g=-0.1)                             # g < 0
    bad = np.array([[1.0, 3.0], [0.0, 1.0]])
    with pytest.raises(VhiError):
        ContactModel(n_nodes=1, stiffness=bad,
                     compliance=compliance_linear(1.0),
                     friction=friction_linear(0.1),
                     g=[0.0], k=[1.0], f0=np.zeros(2), f2=np.zeros(2))
    with pytest.raises(VhiError):
        one_node(omega=-1.0)
    with pytest.raises(VhiError):
        one_node(region=BoxRegion(0.5, 1.0))         # 0 not in B
    with pytest.raises(VhiError):
        ContactModel(n_nodes=2, stiffness=np.eye(4),
                     compliance=compliance_linear(0.1),
                     friction=friction_linear(0.01),
                     g=[0.0, 0.0], k=[1.0, 1.0],
                     f0=np.zeros(4), f2=np.zeros(4),
                     region=BallRegion(1.0), omega=[0.1, 0.2, 0.1, 0.1])


def test_assemble_rejects_smallness_violation():
    with pytest.raises(VhiError):
        assemble(one_node(stiff=1.0, slope_p=1.0, slope_f=0.5))
    with pytest.raises(VhiError):
        assemble(degenerate_contact())
    assemble(degenerate_contact(), allow_degenerate=True)


def test_friction_and_compliance_vanish_without_penetration():
    # with g = k every feasible point has u_nu <= g, so both laws are off
    model = one_node(g=1.0, k=1.0)
    prob = assemble(model)
    for u_nu in (-0.5, 0.2, 1.0):
        u = np.array([u_nu, 0.3])
        assert prob.phi.value(u, np.array([0.1, -2.0])) == 0.0
        assert prob.j.clarke_dd(u, np.array([1.0, 0.0])) == 0.0


def test_assembled_operator_strong_monotonicity_sampled():
    model = default_contact3()
    prob = assemble(model)
    m = prob.A.m_A
    rng = np.random.default_rng(5)
    for _ in range(300):
        x, y = rng.normal(scale=3.0, size=(2, prob.dim))
        d = x - y
        lhs = float((np.asarray(prob.A.apply(x))
                     - np.asarray(prob.A.apply(y))) @ d)
        assert lhs >= (m - 1e-9) * float(d @ d)


def test_assembled_phi_two_slot_bound_sampled():
    prob = assemble(default_contact3())
    a_phi = prob.phi.alpha_phi
    rng = np.random.default_rng(6)
    for _ in range(300):
        e1, e2, v1, v2 = rng.normal(scale=2.0, size=(4, prob.dim))
        lhs = (prob.phi.value(e1, v2) - prob.phi.value(e1, v1)
               + prob.phi.value(e2, v1) - prob.phi.value(e2, v2))
        rhs = a_phi * np.linalg.norm(e1 - e2) * np.linalg.norm(v1 - v2)
        assert lhs <= rhs + 1e-9


def test_compliance_derivative_is_nodewise_sum():
    model = default_contact3()
    prob = assemble(model)
    rng = np.random.default_rng(7)
    for _ in range(50):
        u, w = rng.normal(size=(2, prob.dim))
        expected = sum(
            model.compliance(u[model.normal_indices[i]] - model.g[i])
            * w[model.normal_indices[i]] for i in range(model.n_nodes))
        assert prob.j.clarke_dd(u, w) == pytest.approx(expected, abs=1e-12)
        # linear in the direction argument
        assert prob.j.clarke_dd(u, 2.5 * w) == pytest.approx(
            2.5 * prob.j.clarke_dd(u, w), abs=1e-12)


def test_alpha_estimates_monotone_vs_hump():
    model = default_contact3()
    prob = assemble(model)
    rng = np.random.default_rng(8)
    pairs = [(rng.normal(scale=2.0, size=prob.dim),
              rng.normal(scale=2.0, size=prob.dim)) for _ in range(300)]
    # single-normal-coordinate moves probe each compliance branch directly
    base = rng.normal(scale=0.2, size=prob.dim)
    for i, ni in enumerate(model.normal_indices):
        for lo, hi in ((0.2, 0.6), (1.1, 1.4), (1.6, 2.5)):
            v1, v2 = base.copy(), base.copy()
            v1[ni] = model.g[i] + lo
            v2[ni] = model.g[i] + hi
            pairs.append((v1, v2))
    assert estimate_alpha_j(prob.j, pairs) == 0.0   # nondecreasing compliance

    bumpy = default_contact3().replace(compliance=compliance_hump(1.0))
    prob2 = assemble(bumpy)
    got = estimate_alpha_j(prob2.j, pairs)
    assert got > 0.1                                # falling branch shows up
    assert got <= prob2.j.alpha_j + 1e-12


# --------------------------------------------------------------------------
# exact residual

def test_exact_residual_matches_hand_formula_single_node():
    model = one_node(stiff=2.0, g=0.1, k=5.0, slope_f=0.5, f0=(1.0, 0.7))
    prob = assemble(model)
    u = np.array([0.3, 0.4])             # penetrating, sliding
    r = prob.f - 2.0 * u
    pen = 0.3 - 0.1
    a = r[0] - min(pen, 1.0)             # clamped compliance, slope 1
    fb = 0.5 * pen
    bt = r[1] - fb * np.sign(u[1])
    expected = np.hypot(abs(a), abs(bt))
    assert residual(prob, u) == pytest.approx(expected, abs=1e-12)


def test_exact_residual_stuck_tangent_subtracts_friction():
    model = one_node(stiff=5.0, g=0.0, k=5.0, slope_f=2.0, f0=(0.5, 0.3))
    prob = assemble(model)
    u = np.array([0.2, 0.0])             # stuck tangentially
    r = prob.f - 5.0 * u
    a = r[0] - 0.2
    fb = 2.0 * 0.2
    assert abs(r[1]) < fb                # friction dominates: no tangent defect
    expected = np.hypot(abs(a), max(abs(r[1]) - fb, 0.0))
    assert residual(prob, u) == pytest.approx(expected, abs=1e-12)


def test_exact_residual_active_cap_one_sided():
    model = one_node(stiff=2.0, g=0.5, k=0.5, f0=(2.0, 0.0))
    prob = assemble(model)
    u = np.array([0.5, 0.0])             # cap active, load pushes further in
    r = prob.f - 2.0 * u
    # pushing past the cap is infeasible, so a positive normal defect
    # coefficient only counts when it points back inside
    assert r[0] > 0
    assert residual(prob, u) == pytest.approx(0.0, abs=1e-12)


def test_sampled_residual_never_exceeds_exact():
    import dataclasses
    from vhiwell.wellposed import DirectionSampler
    model = default_contact3()
    prob = assemble(model)
    stripped = dataclasses.replace(prob, exact_residual=None)
    sampler = DirectionSampler(count=512, seed=2)
    rng = np.random.default_rng(3)
    ni = model.normal_indices
    for _ in range(10):
        u = prob.K.project(rng.normal(scale=0.5, size=prob.dim))
        u[ni] = np.minimum(u[ni], model.k - 0.05)   # keep caps inactive
        exact = residual(prob, u)
        sampled = residual(stripped, u, sampler)
        assert sampled <= exact + 1e-9
        assert sampled >= 0.5 * exact    # adapted directions get close


def test_decoupled_model_cross_checks_with_1d_grid():
    # frictionless diagonal model: each DOF is an independent scalar problem
    from vhiwell.examples import build_identity
    from vhiwell.problem import (OperatorA, VhiProblem, box_set,
                                 zero_bifunctional)
    from vhiwell.clarke import LipschitzFunctional
    from vhiwell.space import SpaceDescriptor

    s, g, k = 2.0, 0.1, 0.8
    model = one_node(stiff=s, slope_f=0.0, g=g, k=k, f0=(1.5, 0.6))
    prob = assemble(model)
    u = solve_strongly_monotone(prob, tol=1e-11).solutions[0]

    law = model.compliance

    def scalar_residual(x, f=1.5):
        x0 = float(x[0])
        a = f - s * x0 - law(x0 - g)
        return max(-a, 0.0) if x0 >= k - 1e-12 else abs(a)

    scalar_normal = VhiProblem(
        space=SpaceDescriptor(1), K=box_set(None, [k], dim=1),
        A=OperatorA(apply=lambda x: s * np.asarray(x), m_A=s),
        phi=zero_bifunctional(),
        j=LipschitzFunctional(
            value=lambda x: law.q(float(x[0]) - g),
            clarke_dd=lambda x, w: law(float(x[0]) - g) * float(w[0]),
            subgradient=lambda x: np.array([law(float(x[0]) - g)]),
            alpha_j=law.lipschitz, regular=True),
        f=[1.5],
        exact_residual=scalar_residual)
    rep = solve_1d_grid(scalar_normal, lo=-2.0, hi=0.8, step=1e-5)
    assert abs(rep.solutions[0][0] - u[0]) <= 1e-4
    # tangential DOF reduces to the linear equation s * u = f
    assert abs(u[1] - 0.6 / s) <= 1e-9


def test_solver_output_feasible():
    model = default_contact3()
    prob = assemble(model)
    u = solve_strongly_monotone(prob, tol=1e-10).solutions[0]
    assert np.all(u[model.normal_indices] <= model.k)
    assert omega_member(prob, u, 1e-8)


# --------------------------------------------------------------------------
# gap perturbations

def test_gap_perturbation_bounds_values():
    model = one_node()
    assert gap_perturbation_bounds(model, model.g) == (0.0, 0.0)
    model = one_node(slope_f=0.1, slope_p=1.0, g=0.2, k=5.0)
    b, c = gap_perturbation_bounds(model, model.g + 0.1)
    assert b == pytest.approx(0.01)
    assert c == pytest.approx(0.1)
    with pytest.raises(VhiError):
        gap_perturbation_bounds(model, model.g + 99.0)


def test_gap_schedule_halving_bounds():
    model = default_contact3()
    g_seq = [model.g + 2.0 ** -(n + 1) * 0.25 for n in range(5)]
    sched = gap_schedule(model, g_seq)
    eps = [epsilon_of_step(sched, n) for n in range(5)]
    for a, b in zip(eps, eps[1:]):
        assert b == pytest.approx(0.5 * a)


def test_convergence_study_gap_and_zero_schedules():
    model = default_contact3()
    g_seq = [model.g + 2.0 ** -(n + 1) * 0.5 for n in range(5)]
    table = contact_convergence_study(model, gap_schedule(model, g_seq),
                                      _solver(), verify_pairs=50)
    assert table.passed
    errs = table.errors
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
    for row in table.rows:
        assert row.passed

    zero = gap_schedule(model, [model.g, model.g])
    table = contact_convergence_study(model, zero, _solver(), verify_pairs=50)
    assert all(r.error <= 1e-9 for r in table.rows)


def test_load_schedule_runs():
    model = default_contact3()
    f0_seq = [model.f0 + 2.0 ** -(n + 1) for n in range(4)]
    table = contact_convergence_study(model, load_schedule(model, f0_seq),
                                      _solver(), verify_pairs=50)
    assert table.passed


# --------------------------------------------------------------------------
# ill-posedness witness

def test_witness_finds_two_zero_defect_points():
    report = illposed_witness(degenerate_contact(), seed=0)
    assert report.count >= 2
    assert all(r <= 1e-12 for r in report.residuals)
    assert any(np.linalg.norm(p) == 0.0 for p in report.points)
    assert any(np.linalg.norm(p) > 0.1 for p in report.points)


def test_witness_requires_degenerate_data():
    with pytest.raises(VhiError):
        illposed_witness(default_contact3())
    loaded = degenerate_contact().replace(f0=np.array([0.1, 0.0]))
    with pytest.raises(VhiError):
        illposed_witness(loaded)


def test_witness_fails_on_pointlike_core():
    model = degenerate_contact().replace(region=BallRegion(0.0),
                                         g=np.array([0.0]))
    with pytest.raises(SolverFailure):
        illposed_witness(model)


def test_witness_two_node_chain_with_ball_region():
    model = ContactModel(
        n_nodes=2, stiffness=np.zeros((4, 4)),
        compliance=compliance_clamped(1.0, 1.0),
        friction=friction_linear(0.1),
        g=[0.3, 0.3], k=[1.0, 1.0], f0=np.zeros(4), f2=np.zeros(4),
        region=BallRegion(1.0), omega=1.0)
    report = illposed_witness(model, seed=3)
    assert report.count >= 2
    assert all(r <= 1e-12 for r in report.residuals)


def test_degenerate_slack_sets_have_large_diameter():
    prob = assemble(degenerate_contact(), allow_degenerate=True)
    sweep = diam_sweep(prob, [1e-1, 1e-2, 1e-3],
                       candidates=CandidateStream(lo=-2.0, hi=2.0,
                                                  coarse=400, seed=1))
    assert not sweep.well_posed
    for row in sweep.rows:
        assert row.diameter_lower >= 0.2
