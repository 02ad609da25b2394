import math

import numpy as np
import pytest

from ..bench.generators import generate_problem
from ..solvers.base import AlgorithmId
from ..tuning.rates import (complexity_trend, iterations_bound, iterations_exact, rate_for, theta_nonsmooth,
                            theta_smooth, theta_two_function)
from ..tuning.stepsizes import (Regime, StepSizes, check_feasible, constraint_values, is_feasible,
                                stepsizes_balanced, stepsizes_classical, stepsizes_for, stepsizes_linear_constraint,
                                stepsizes_nonsmooth, stepsizes_smooth, stepsizes_two_function)
from ..utils.errors import InfeasibleStepsizeError


@pytest.mark.parametrize("L_f, mu_g, expected", [
    (4.0, 1.0, (0.5, 0.5)),
    (1.0, 1.0, (1.0, 1.0)),
    (100.0, 1.0, (0.1, 0.1)),
])
def test_two_function_stepsizes(L_f, mu_g, expected):
    steps = stepsizes_two_function(L_f, mu_g)
    assert (steps.eta_x, steps.eta_z) == pytest.approx(expected, rel=1e-12)
    assert L_f * steps.eta_x * steps.eta_z == pytest.approx(1.0, rel=1e-12)


def test_two_function_stepsizes_need_strong_convexity():
    with pytest.raises(InfeasibleStepsizeError, match="mu_g > 0"):
        stepsizes_two_function(4.0, 0.0)


def test_smooth_stepsizes_example():
    steps = stepsizes_smooth(4.0, 1.0, 1.0, 1.0)
    assert (steps.eta_x, steps.eta_y, steps.eta_z) == pytest.approx((0.5, 0.5, 0.25), rel=1e-12)
    (value,) = constraint_values(steps, 4.0, 1.0).values()
    assert value == pytest.approx(0.75, rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0, 1.0), (4.0, -1.0, 1.0, 1.0), (4.0, 1.0, 0.0, 1.0)])
def test_smooth_stepsizes_reject_nonpositive_inputs(args):
    with pytest.raises(InfeasibleStepsizeError):
        stepsizes_smooth(*args)


def test_nonsmooth_stepsizes_all_ones():
    steps = stepsizes_nonsmooth(1.0, 1.0, 1.0, 1.0, 1.0)
    assert steps.eta_x == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    assert steps.eta_y == pytest.approx(math.sqrt(2) / 8, rel=1e-12)
    assert steps.eta_z == pytest.approx(math.sqrt(2) / 8, rel=1e-12)
    values = constraint_values(steps, 1.0, 1.0)
    assert values["8*||K||^2*eta_x*eta_y"] == pytest.approx(1.0, rel=1e-12)


def test_nonsmooth_stepsizes_reject_degenerate_constants():
    with pytest.raises(InfeasibleStepsizeError, match="lambda_min"):
        stepsizes_nonsmooth(1.0, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(InfeasibleStepsizeError, match="L_g >= mu_g"):
        stepsizes_nonsmooth(1.0, 0.5, 1.0, 1.0, 1.0)


def test_linear_constraint_stepsizes_use_positive_lambda():
    steps = stepsizes_linear_constraint(1.0, 1.0, 1.0, 1.0, 0.25)
    assert steps.regime is Regime.LINEAR_CONSTRAINT
    assert steps.eta_x == pytest.approx(min(1.0, 0.5 / math.sqrt(2)), rel=1e-12)


def test_check_feasible_names_the_constraint():
    steps = StepSizes(eta_x=1.0, eta_z=1.0, regime=Regime.TWO_FUNCTION)
    assert not is_feasible(steps, 2.0)
    with pytest.raises(InfeasibleStepsizeError, match=r"L_f\*eta_x\*eta_z <= 1"):
        check_feasible(steps, 2.0)


def test_stepsizes_need_eta_y_in_primal_dual_regimes():
    with pytest.raises(InfeasibleStepsizeError):
        StepSizes(eta_x=1.0, eta_z=1.0, regime=Regime.SMOOTH_H)
    with pytest.raises(InfeasibleStepsizeError):
        StepSizes(eta_x=-1.0, eta_z=1.0, regime=Regime.TWO_FUNCTION)


@pytest.mark.parametrize("regime", [Regime.TWO_FUNCTION, Regime.SMOOTH_H, Regime.NONSMOOTH_H,
                                    Regime.LINEAR_CONSTRAINT])
def test_balanced_stepsizes_are_feasible(regime):
    steps = stepsizes_balanced(regime, 9.0, 2.0)
    assert is_feasible(steps, 9.0, 2.0)


@pytest.mark.parametrize("alg", [AlgorithmId.PGD, AlgorithmId.FRB, AlgorithmId.CV1, AlgorithmId.CV2,
                                 AlgorithmId.PDTR1, AlgorithmId.PDTR2, AlgorithmId.CP])
def test_classical_stepsizes(alg):
    steps = stepsizes_classical(alg, 4.0, 2.0)
    assert steps.regime is Regime.CLASSICAL
    assert steps.eta_x > 0
    if alg.is_primal_dual:
        assert steps.eta_y > 0


def test_classical_stepsizes_refuse_accelerated_methods():
    with pytest.raises(InfeasibleStepsizeError):
        stepsizes_classical(AlgorithmId.ACV1, 4.0, 1.0)


def test_theta_two_function():
    rate = theta_two_function(StepSizes(eta_x=0.5, eta_z=0.5, regime=Regime.TWO_FUNCTION), 1.0)
    assert rate.theta == pytest.approx(0.8, rel=1e-12)
    assert rate.component("primal") == pytest.approx(2 / 3, rel=1e-12)
    assert rate.component("z-damping") == pytest.approx(0.8, rel=1e-12)
    assert not rate.no_linear_rate


def test_theta_without_strong_convexity_is_flagged():
    rate = theta_two_function(StepSizes(eta_x=0.5, eta_z=0.5, regime=Regime.TWO_FUNCTION), 0.0)
    assert rate.theta == 1.0
    assert rate.no_linear_rate
    smooth = theta_smooth(StepSizes(eta_x=0.5, eta_y=0.5, eta_z=0.5, regime=Regime.SMOOTH_H), 0.0, 0.0)
    assert smooth.theta == 1.0 and smooth.no_linear_rate


def test_theta_smooth_components():
    rate = theta_smooth(stepsizes_smooth(4.0, 1.0, 1.0, 1.0), 1.0, 1.0)
    assert dict(rate.components) == pytest.approx({"primal": 2 / 3, "dual": 2 / 3, "z-damping": 8 / 9}, rel=1e-12)
    assert rate.theta == pytest.approx(8 / 9, rel=1e-12)


def test_theta_nonsmooth_all_ones():
    rate = theta_nonsmooth(stepsizes_nonsmooth(1.0, 1.0, 1.0, 1.0, 1.0), 1.0, 1.0, 1.0, 1.0)
    assert rate.theta == pytest.approx(320 / 321, rel=1e-12)
    assert rate.component("dual-coupling") == pytest.approx(320 / 321, rel=1e-12)


def test_theta_monotone_in_strong_convexity():
    steps = StepSizes(eta_x=0.3, eta_y=0.4, eta_z=0.2, regime=Regime.SMOOTH_H)
    thetas = [theta_smooth(steps, mu, 1.0).component("primal") for mu in (0.5, 1.0, 2.0, 4.0)]
    assert thetas == sorted(thetas, reverse=True)


def test_iteration_bound_is_sufficient():
    rate = theta_two_function(stepsizes_two_function(100.0, 1.0), 1.0)
    for eps in (1e-2, 1e-6, 1e-10):
        k = iterations_bound(rate, eps)
        assert rate.theta ** k <= eps
        exact = iterations_exact(rate, eps)
        assert rate.theta ** exact <= eps * (1 + 1e-12)
        assert exact <= k


def test_iteration_bound_without_rate():
    rate = theta_two_function(StepSizes(eta_x=1.0, eta_z=1.0, regime=Regime.TWO_FUNCTION), 0.0)
    assert iterations_bound(rate, 1e-6) is None
    assert iterations_exact(rate, 1e-6) is None


@pytest.mark.parametrize("regime", [Regime.TWO_FUNCTION, Regime.SMOOTH_H, Regime.NONSMOOTH_H,
                                    Regime.LINEAR_CONSTRAINT])
def test_corollary_steps_satisfy_constraints_on_generated_problems(regime):
    problem = generate_problem(regime, 8, 4, seed=9, conditioning=16.0)
    steps = stepsizes_for(problem)
    assert steps.regime is regime
    check_feasible(steps, problem.L_f, problem.K_norm)
    rate = rate_for(problem, steps)
    assert 0 < rate.theta < 1


def test_complexity_trend_grows_with_conditioning():
    trends = [complexity_trend(generate_problem(Regime.TWO_FUNCTION, 6, 1, seed=0, conditioning=c),
                               Regime.TWO_FUNCTION, 1e-6) for c in (4.0, 16.0, 64.0)]
    assert trends == sorted(trends)
    assert trends[1] == pytest.approx((1 + math.sqrt(16.0)) * math.log(1e6), rel=1e-8)


def test_transfer_improves_the_two_function_rate():
    plain = generate_problem(Regime.TWO_FUNCTION, 6, 1, seed=2, conditioning=16.0, mu_f=2.0)
    moved = generate_problem(Regime.TWO_FUNCTION, 6, 1, seed=2, conditioning=16.0, mu_f=2.0, transfer=True)
    assert moved.mu_g == pytest.approx(plain.mu_g + 2.0, rel=1e-9)
    theta_plain = rate_for(plain, stepsizes_for(plain)).theta
    theta_moved = rate_for(moved, stepsizes_for(moved)).theta
    assert theta_moved < theta_plain
    np.testing.assert_allclose(moved.L_f, 14.0, rtol=1e-8)
