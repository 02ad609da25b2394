import numpy as np
import pytest

from ..bench.generators import generate_problem
from ..funcs.base import FunctionHandle
from ..linops.operator import LinearMap
from ..lyapunov.contraction import LyapunovRecord, verify_contraction, verify_per_step
from ..lyapunov.functions import (SIGN_TABLE, check_sandwich, lyapunov_upper, lyapunov_value, phi,
                                  random_feasible_state, sign_pattern)
from ..lyapunov.reference import ReferenceSolution, solve_reference
from ..lyapunov.residuals import kkt_components, kkt_residual
from ..solvers.base import AlgorithmId, CompositeProblem, SolverState
from ..tuning.rates import RateBound
from ..tuning.stepsizes import Regime, StepSizes
from ..utils.errors import LyapunovBoundError, ReferenceSolveError

A = AlgorithmId


def records(values, theta=0.5):
    return [LyapunovRecord(k=k, value=v, envelope=theta ** k * values[0], kkt=0.0) for k, v in enumerate(values)]


def rate(theta):
    return RateBound(theta=theta, components=(("primal", theta),))


def test_sign_table():
    assert (SIGN_TABLE[A.ACV1].s_Ky, SIGN_TABLE[A.ACV1].s_fz) == (-1, -1)
    assert (SIGN_TABLE[A.ACV2].s_Ky, SIGN_TABLE[A.ACV2].s_fz) == (+1, -1)
    assert (SIGN_TABLE[A.APDTR1].s_Ky, SIGN_TABLE[A.APDTR1].s_fz) == (-1, +1)
    assert (SIGN_TABLE[A.APDTR2].s_Ky, SIGN_TABLE[A.APDTR2].s_fz) == (+1, +1)
    assert SIGN_TABLE[A.APGD].s_Ky is None


@pytest.mark.parametrize("baseline, accelerated", [
    (A.PGD, A.APGD), (A.FRB, A.APGE), (A.CV1, A.ACV1), (A.CV2, A.ACV2),
    (A.PDTR1, A.APDTR1), (A.PDTR2, A.APDTR2), (A.CP, A.ACV1),
])
def test_baselines_use_their_counterpart_pattern(baseline, accelerated):
    assert sign_pattern(baseline) == SIGN_TABLE[accelerated]


def test_scalar_apgd_functional_vanishes(scalar_two_problem):
    """x = z = 1, x* = 0, eta = 1: 1/2 + 1/2 - 1 = 0"""
    ref = ReferenceSolution(x_star=np.zeros(1), y_star=None, z_star=np.zeros(1), kkt_residual=0.0)
    steps = StepSizes(eta_x=1.0, eta_z=1.0, regime=Regime.TWO_FUNCTION)
    state = SolverState(x=np.ones(1), y=None, z=np.ones(1))
    assert phi(scalar_two_problem, steps, state, ref, SIGN_TABLE[A.APGD]) == pytest.approx(0.0, abs=1e-15)


def test_functional_vanishes_at_the_reference():
    problem = generate_problem(Regime.SMOOTH_H, 6, 3, seed=1, conditioning=4.0)
    ref = solve_reference(problem)
    steps = StepSizes(eta_x=0.3, eta_y=0.3, eta_z=0.3, regime=Regime.SMOOTH_H)
    for alg in (A.ACV1, A.ACV2, A.APDTR1, A.APDTR2):
        assert lyapunov_value(problem, alg, steps, ref.as_state(), ref) == pytest.approx(0.0, abs=1e-15)


def _feasible_steps(rng, problem, primal_dual):
    ex, ey, ez = rng.uniform(0.05, 3.0, size=3)
    coupling = problem.L_f * ex * ez + (problem.K_norm ** 2 * ex * ey if primal_dual else 0.0)
    if coupling > 1:
        ex *= (1 - 1e-9) / coupling
    if primal_dual:
        return StepSizes(eta_x=ex, eta_y=ey, eta_z=ez, regime=Regime.SMOOTH_H)
    return StepSizes(eta_x=ex, eta_z=ez, regime=Regime.TWO_FUNCTION)


def test_sandwich_on_random_feasible_pairs(rng):
    """0 <= value <= upper for 1000 random (state, stepsize) pairs"""
    two = generate_problem(Regime.TWO_FUNCTION, 5, 1, seed=21, conditioning=9.0)
    pd = generate_problem(Regime.SMOOTH_H, 5, 3, seed=22, conditioning=9.0)
    refs = {id(two): solve_reference(two), id(pd): solve_reference(pd)}
    algs = [A.APGD, A.APGE, A.ACV1, A.ACV2, A.APDTR1, A.APDTR2]
    for i in range(1000):
        alg = algs[i % len(algs)]
        problem = pd if alg.is_primal_dual else two
        ref = refs[id(problem)]
        steps = _feasible_steps(rng, problem, alg.is_primal_dual)
        state = random_feasible_state(problem, rng, scale=rng.uniform(0.01, 10.0))
        value = lyapunov_value(problem, alg, steps, state, ref)
        upper = lyapunov_upper(problem, alg, steps, state, ref)
        check_sandwich(value, upper, k=i)


def test_check_sandwich_raises_outside_the_bounds():
    with pytest.raises(LyapunovBoundError):
        check_sandwich(-1.0, 2.0, k=3)
    with pytest.raises(LyapunovBoundError):
        check_sandwich(3.0, 2.0, k=3)
    check_sandwich(0.0, 0.0, k=0)


def test_verify_contraction_passes_on_geometric_decay():
    report = verify_contraction(records([1.0, 0.5, 0.25, 0.125]), rate(0.5))
    assert report.passed
    assert report.checked == 4


def test_verify_contraction_reports_every_violation():
    report = verify_contraction(records([1.0, 0.6, 0.25, 0.2]), rate(0.5))
    assert report.violations == [1, 3]
    assert report.first_violation == 1


def test_verify_contraction_allows_the_floor():
    """Values at rounding level stay within floor * value_0"""
    values = [1.0, 1e-9, 1e-17, 5e-21]
    assert verify_contraction(records(values), rate(1e-8), floor=1e-20).passed
    assert verify_contraction(records(values), rate(1e-8), floor=0.0).violations == [3]


def test_verify_contraction_without_linear_rate_is_vacuous():
    no_rate = RateBound(theta=1.0, components=(), no_linear_rate=True)
    report = verify_contraction(records([1.0, 5.0, 7.0]), no_rate)
    assert report.passed
    assert report.no_linear_rate
    assert report.note == "no linear rate"


def test_verify_per_step():
    assert verify_per_step(records([1.0, 0.5, 0.2]), rate(0.5)).passed
    assert verify_per_step(records([1.0, 0.4, 0.3]), rate(0.5)).violations == [2]


def test_reference_of_shifted_quadratic():
    c = np.array([1.0, -2.0, 0.5])
    problem = CompositeProblem(f=FunctionHandle.quadratic(np.eye(3), c), g=FunctionHandle.zero(3))
    ref = solve_reference(problem)
    np.testing.assert_allclose(ref.x_star, c, atol=1e-12)
    assert ref.y_star is None


def test_reference_of_point_constraint():
    b = np.array([1.0, 2.0])
    problem = CompositeProblem(f=FunctionHandle.quadratic(np.eye(2), np.zeros(2)), g=FunctionHandle.zero(2),
                               h=FunctionHandle.indicator_point(b), K=LinearMap.identity(2))
    ref = solve_reference(problem)
    np.testing.assert_allclose(ref.x_star, b, atol=1e-12)
    np.testing.assert_allclose(ref.y_star, -b, atol=1e-12)
    assert ref.method == "kkt-lstsq"


@pytest.mark.parametrize("regime", [Regime.TWO_FUNCTION, Regime.SMOOTH_H, Regime.NONSMOOTH_H,
                                    Regime.LINEAR_CONSTRAINT])
def test_reference_meets_tolerance_on_generated_problems(regime):
    problem = generate_problem(regime, 10, 5, seed=13, conditioning=16.0)
    ref = solve_reference(problem)
    assert ref.kkt_residual <= 1e-10
    assert kkt_residual(problem, ref.as_state()) <= 1e-10


def test_reference_min_norm_dual_for_rank_deficient_constraint():
    problem = generate_problem(Regime.LINEAR_CONSTRAINT, 6, 4, seed=8, conditioning=4.0, rank=2)
    ref = solve_reference(problem)
    assert kkt_components(problem, ref.as_state())["range"] <= 1e-10


def test_reference_failure_reports_residual():
    """f + g unbounded below: x_2 runs off along the linear term"""
    problem = CompositeProblem(f=FunctionHandle.quadratic(np.array([[1.0, 0.0]]), np.zeros(1)),
                               g=FunctionHandle.linear([0.0, 1.0]))
    with pytest.raises(ReferenceSolveError) as info:
        solve_reference(problem, max_iters=200)
    assert info.value.residual >= 1.0


def test_kkt_residual_grows_linearly_with_perturbation(rng):
    problem = generate_problem(Regime.NONSMOOTH_H, 8, 4, seed=17, conditioning=4.0)
    ref = solve_reference(problem)
    direction = rng.standard_normal(8)
    direction /= np.linalg.norm(direction)

    def residual(delta):
        x = ref.x_star + delta * direction
        return kkt_residual(problem, SolverState(x=x, y=ref.y_star, z=x))

    ratio = residual(1e-4) / residual(1e-6)
    assert 90.0 <= ratio <= 110.0


def test_kkt_components_are_labelled_and_finite(rng):
    problem = generate_problem(Regime.LINEAR_CONSTRAINT, 6, 3, seed=2, conditioning=4.0)
    state = random_feasible_state(problem, rng)
    parts = kkt_components(problem, state)
    assert set(parts) == {"g", "h", "z", "range"}
    assert all(np.isfinite(v) for v in parts.values())


def test_kkt_g_part_for_point_indicator_is_the_distance_to_the_point():
    b = np.array([1.0, -2.0])
    problem = CompositeProblem(f=FunctionHandle.quadratic(np.eye(2), np.zeros(2)),
                               g=FunctionHandle.indicator_point(b))
    x = b + np.array([0.3, -0.4])
    parts = kkt_components(problem, SolverState(x=x, y=None, z=x))
    assert parts["g"] == pytest.approx(0.5, rel=1e-12)
    assert np.isfinite(kkt_residual(problem, SolverState(x=x, y=None, z=x)))
    assert kkt_components(problem, SolverState(x=b.copy(), y=None, z=b.copy()))["g"] == 0.0
