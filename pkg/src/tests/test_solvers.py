import numpy as np
import pytest

from ..bench.generators import generate_problem
from ..funcs.base import FunctionHandle
from ..linops.operator import distance_to_range
from ..lyapunov.reference import solve_reference
from ..solvers.base import AlgorithmId, CompositeProblem, SolverState, StopRule
from ..solvers.runner import init, run
from ..solvers.steps import step
from ..tuning.stepsizes import Regime, StepSizes, stepsizes_classical, stepsizes_for
from ..utils.errors import NonFiniteIterateError, ProblemShapeError
from ..utils.metrics import OracleCounter

A = AlgorithmId
HALF = StepSizes(eta_x=0.5, eta_y=0.5, eta_z=0.5, regime=Regime.SMOOTH_H)


@pytest.mark.parametrize("alg, expected", [
    (A.ACV1, (0.0, 1 / 3, 1 / 3)),
    (A.ACV2, (0.0, 1.0, 1 / 3)),
    (A.APDTR1, (0.0, 1 / 3, 1.0)),
    (A.APDTR2, (0.0, 1.0, 1.0)),
])
def test_scalar_primal_dual_steps(scalar_pd_problem, alg, expected):
    """One step from x = y = z = 1 with all stepsizes 1/2"""
    state = init(scalar_pd_problem, alg, [1.0], y0=[1.0], z0=[1.0])
    nxt = step(scalar_pd_problem, alg, HALF, state)
    assert (nxt.x[0], nxt.y[0], nxt.z[0]) == pytest.approx(expected, abs=1e-15)
    assert nxt.k == 1


def test_scalar_apgd_step(scalar_two_problem):
    steps = StepSizes(eta_x=1.0, eta_z=1.0, regime=Regime.TWO_FUNCTION)
    nxt = step(scalar_two_problem, A.APGD, steps, init(scalar_two_problem, A.APGD, [1.0]))
    assert (nxt.x[0], nxt.z[0]) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_scalar_apge_step(scalar_two_problem):
    steps = StepSizes(eta_x=0.5, eta_z=1.0, regime=Regime.TWO_FUNCTION)
    nxt = step(scalar_two_problem, A.APGE, steps, init(scalar_two_problem, A.APGE, [1.0]))
    assert nxt.z[0] == pytest.approx(1.0)
    assert nxt.x[0] == pytest.approx(0.5)


def test_frb_reflects_the_previous_gradient(scalar_two_problem):
    steps = StepSizes(eta_x=0.25, eta_z=1.0, regime=Regime.CLASSICAL)
    state = init(scalar_two_problem, A.FRB, [1.0])
    state = step(scalar_two_problem, A.FRB, steps, state)
    assert state.x[0] == pytest.approx(0.75)
    state = step(scalar_two_problem, A.FRB, steps, state)
    assert state.x[0] == pytest.approx(0.625)


def test_init_rejects_dual_start_for_two_function_methods(scalar_two_problem):
    with pytest.raises(ProblemShapeError):
        init(scalar_two_problem, A.APGD, [1.0], y0=[0.0])


def test_init_rejects_mismatched_algorithm(scalar_two_problem, scalar_pd_problem):
    with pytest.raises(ProblemShapeError):
        init(scalar_two_problem, A.ACV1, [1.0])
    with pytest.raises(ProblemShapeError):
        init(scalar_pd_problem, A.APGD, [1.0])


def test_cp_needs_a_quadratic_g():
    problem = generate_problem(Regime.SMOOTH_H, 4, 3, seed=1, conditioning=2.0)
    steps = stepsizes_classical(A.CP, problem.L_f, problem.K_norm)
    with pytest.raises(ProblemShapeError, match="quadratic g"):
        step(problem, A.CP, steps, init(problem, A.CP, np.zeros(4)))


def test_oracle_calls_per_iteration():
    problem = generate_problem(Regime.SMOOTH_H, 5, 3, seed=2, conditioning=2.0)
    steps = stepsizes_for(problem)
    for alg in (A.ACV1, A.ACV2, A.APDTR1, A.APDTR2):
        counter = OracleCounter()
        state = init(problem, alg, np.zeros(5), counter=counter)
        assert counter.grad_f == 1
        counter.reset()
        step(problem, alg, steps, state, counter)
        assert counter.as_dict() == {"grad_f": 1, "prox_g": 1, "prox_hconj": 1, "k_apply": 1, "k_adjoint": 1}


def test_max_iters_zero_gives_single_record():
    problem = generate_problem(Regime.TWO_FUNCTION, 4, 1, seed=0, conditioning=4.0)
    steps = stepsizes_for(problem)
    state, trace = run(problem, A.APGD, steps, init(problem, A.APGD, np.zeros(4)), StopRule(max_iters=0))
    assert len(trace) == 1
    assert state.k == 0
    assert trace[0].envelope == trace[0].value


def test_divergent_stepsize_raises_non_finite():
    """PGD with eta = 100 / L_f on an L_f = 10 quadratic"""
    problem = CompositeProblem(f=FunctionHandle.quadratic(np.sqrt(10.0) * np.eye(2), np.zeros(2)),
                               g=FunctionHandle.zero(2))
    steps = StepSizes(eta_x=100.0 / problem.L_f, eta_z=1.0, regime=Regime.CLASSICAL)
    with pytest.raises(NonFiniteIterateError) as info:
        run(problem, A.PGD, steps, init(problem, A.PGD, [1.0, 1.0]), StopRule(max_iters=200))
    assert 0 < info.value.iteration <= 200


def test_smooth_acv1_reaches_small_kkt():
    problem = generate_problem(Regime.SMOOTH_H, 20, 10, seed=7, conditioning=1.0)
    steps = stepsizes_for(problem)
    _, trace = run(problem, A.ACV1, steps, init(problem, A.ACV1, np.zeros(20)), StopRule(max_iters=300))
    assert len(trace) == 301
    assert trace[-1].kkt <= 1e-8


FIXED_POINT_CASES = [
    (A.APGD, Regime.TWO_FUNCTION), (A.APGE, Regime.TWO_FUNCTION),
    (A.PGD, Regime.TWO_FUNCTION), (A.FRB, Regime.TWO_FUNCTION),
    (A.ACV1, Regime.SMOOTH_H), (A.ACV2, Regime.SMOOTH_H),
    (A.APDTR1, Regime.SMOOTH_H), (A.APDTR2, Regime.SMOOTH_H),
    (A.CV1, Regime.SMOOTH_H), (A.CV2, Regime.SMOOTH_H),
    (A.PDTR1, Regime.SMOOTH_H), (A.PDTR2, Regime.SMOOTH_H),
    # CP folds f into a quadratic g
    (A.CP, Regime.NONSMOOTH_H),
]


@pytest.mark.parametrize("alg, regime", FIXED_POINT_CASES)
def test_reference_is_a_fixed_point(alg, regime):
    problem = generate_problem(regime, 8, 4, seed=3, conditioning=4.0)
    ref = solve_reference(problem)
    if alg.is_accelerated:
        steps = stepsizes_for(problem)
    else:
        steps = stepsizes_classical(alg, problem.L_f, problem.K_norm if problem.is_primal_dual else 0.0)
    y0 = ref.y_star if alg.is_primal_dual else None
    state = init(problem, alg, ref.x_star, y0=y0, z0=ref.z_star)
    for _ in range(100):
        state = step(problem, alg, steps, state)
    assert np.linalg.norm(state.x - ref.x_star) <= 1e-8
    if y0 is not None:
        assert np.linalg.norm(state.y - ref.y_star) <= 1e-8


def test_runs_are_deterministic():
    problem = generate_problem(Regime.SMOOTH_H, 6, 3, seed=5, conditioning=4.0)
    steps = stepsizes_for(problem)
    results = [
        run(problem, A.APDTR2, steps, init(problem, A.APDTR2, np.zeros(6)), StopRule(max_iters=50),
            record_wall_time=False)
        for _ in range(2)
    ]
    (s1, t1), (s2, t2) = results
    np.testing.assert_array_equal(s1.x, s2.x)
    assert t1 == t2


def _max_gap(problem, acc, base, steps_acc, steps_base, iters=50):
    x0 = np.linspace(-1.0, 1.0, problem.d_x)
    a, b = init(problem, acc, x0), init(problem, base, x0)
    gap = 0.0
    for _ in range(iters):
        a = step(problem, acc, steps_acc, a)
        b = step(problem, base, steps_base, b)
        gap = max(gap, float(np.max(np.abs(a.x - b.x))))
        if a.y is not None:
            gap = max(gap, float(np.max(np.abs(a.y - b.y))))
    return gap


@pytest.mark.parametrize("acc, base", [(A.APGD, A.PGD), (A.ACV1, A.CV1), (A.ACV2, A.CV2)])
def test_unit_damping_reduces_to_the_baseline(acc, base):
    regime = Regime.SMOOTH_H if acc.is_primal_dual else Regime.TWO_FUNCTION
    problem = generate_problem(regime, 10, 5, seed=11, conditioning=8.0)
    steps = stepsizes_classical(base, problem.L_f, problem.K_norm)
    assert _max_gap(problem, acc, base, steps, steps) <= 1e-12


@pytest.mark.parametrize("acc, base", [(A.APGE, A.FRB), (A.APDTR1, A.PDTR1), (A.APDTR2, A.PDTR2)])
def test_large_damping_approaches_reflected_baseline(acc, base):
    regime = Regime.SMOOTH_H if acc.is_primal_dual else Regime.TWO_FUNCTION
    problem = generate_problem(regime, 10, 5, seed=12, conditioning=8.0)
    steps = stepsizes_classical(base, problem.L_f, problem.K_norm)
    assert _max_gap(problem, acc, base, steps.with_values(eta_z=1e9), steps) <= 1e-6


def test_constrained_dual_stays_in_range():
    problem = generate_problem(Regime.LINEAR_CONSTRAINT, 6, 4, seed=4, conditioning=2.0, rank=2)
    steps = stepsizes_for(problem)
    state = init(problem, A.ACV1, np.zeros(6), y0=np.ones(4))
    assert distance_to_range(problem.K, state.y) <= 1e-10
    for _ in range(100):
        state = step(problem, A.ACV1, steps, state)
        assert distance_to_range(problem.K, state.y) <= 1e-10


def test_solver_state_finiteness():
    assert SolverState(x=np.zeros(2), y=None, z=np.zeros(2)).is_finite()
    assert not SolverState(x=np.array([np.nan, 0.0]), y=None, z=np.zeros(2)).is_finite()
