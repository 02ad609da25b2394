import time
import numpy as np
from typing import Any, List, Optional, Tuple
from loguru import logger

from ..config import get_settings
from ..funcs.ops import gradient
from ..linops.operator import as_vector, project_range
from ..lyapunov.contraction import LyapunovRecord
from ..lyapunov.functions import check_sandwich, lyapunov_upper, lyapunov_value, sandwich_applies
from ..lyapunov.reference import ReferenceSolution, solve_reference
from ..lyapunov.residuals import kkt_residual
from ..tuning.rates import RateBound, rate_for
from ..tuning.stepsizes import StepSizes
from ..utils.errors import NonFiniteIterateError, ProblemShapeError
from ..utils.metrics import OracleCounter, bump
from .base import AlgorithmId, CompositeProblem, SolverState, StopRule, check_compatible
from .steps import step


def init(problem: CompositeProblem, alg: AlgorithmId, x0: Any,
         y0: Optional[Any] = None, z0: Optional[Any] = None,
         counter: Optional[OracleCounter] = None) -> SolverState:
    """
    Build the starting state

    z defaults to x0 and y to zero; for constrained problems y0 is projected onto ran(K).
    For FRB and PDTR, z0 (when given) plays the role of x^{-1}; otherwise x^{-1} = x^0.

    Args:
        problem: Composite problem
        alg: Algorithm to be run
        x0: Primal start
        y0: Dual start (primal-dual algorithms only)
        z0: Start of the z-sequence
        counter: Optional oracle counter for the primed gradient

    Returns:
        SolverState: State with k = 0 and primed gradient caches
    """
    check_compatible(problem, alg)
    x = np.array(as_vector(x0, problem.d_x, "x0"))

    if alg.is_primal_dual:
        y = np.zeros(problem.d_y) if y0 is None else np.array(as_vector(y0, problem.d_y, "y0"))
        if problem.is_linearly_constrained:
            y = project_range(problem.K, y)
    elif y0 is not None:
        raise ProblemShapeError(f"{alg.label} has no dual variable; y0 must be omitted")
    else:
        y = None

    z_given = None if z0 is None else np.array(as_vector(z0, problem.d_x, "z0"))
    if alg is AlgorithmId.CP:
        return SolverState(x=x, y=y, z=x.copy(), k=0)

    if alg.is_accelerated:
        z = x.copy() if z_given is None else z_given
        bump(counter, "grad_f")
        return SolverState(x=x, y=y, z=z, k=0, grad_z=gradient(problem.f, z))

    bump(counter, "grad_f")
    gx = gradient(problem.f, x)
    grad_prev = None
    if z_given is not None and alg in (AlgorithmId.FRB, AlgorithmId.PDTR1, AlgorithmId.PDTR2):
        bump(counter, "grad_f")
        grad_prev = gradient(problem.f, z_given)
    return SolverState(x=x, y=y, z=x.copy(), k=0, grad_z=gx, grad_prev=grad_prev)


def _should_stop(stop: StopRule, record: LyapunovRecord, value0: float) -> bool:
    if stop.kkt_tol is not None and record.kkt <= stop.kkt_tol:
        return True
    if stop.value_tol is not None and record.value <= stop.value_tol * value0:
        return True
    return False


def run(problem: CompositeProblem,
        alg: AlgorithmId,
        stepsizes: StepSizes,
        state0: SolverState,
        stop: StopRule,
        reference: Optional[ReferenceSolution] = None,
        rate: Optional[RateBound] = None,
        counter: Optional[OracleCounter] = None,
        record_wall_time: Optional[bool] = None,
        check_bounds: bool = True) -> Tuple[SolverState, List[LyapunovRecord]]:
    """
    Iterate alg from state0 and record the Lyapunov trace

    Args:
        problem: Composite problem
        alg: Algorithm
        stepsizes: Resolved stepsizes
        state0: Starting state from init
        stop: Stopping rule
        reference: Solution used by the Lyapunov functional; solved when omitted
        rate: Contraction factor for the envelope column; derived from the regime when omitted
        counter: Oracle counter, updated in place
        record_wall_time: Record cumulative wall time per row (zeros otherwise)
        check_bounds: Assert the Lyapunov sandwich bounds when the stepsizes allow it

    Returns:
        Tuple[SolverState, List[LyapunovRecord]]: Final state and one record per iterate
    """
    check_compatible(problem, alg)
    record_wall_time = get_settings().RECORD_WALL_TIME if record_wall_time is None else record_wall_time
    reference = reference if reference is not None else solve_reference(problem)
    rate = rate if rate is not None else rate_for(problem, stepsizes)
    check_bounds = check_bounds and sandwich_applies(problem, alg, stepsizes)
    log = logger.bind(alg=alg.value, regime=stepsizes.regime.value)

    def measure(state: SolverState) -> Tuple[float, float]:
        value = lyapunov_value(problem, alg, stepsizes, state, reference)
        if check_bounds:
            check_sandwich(value, lyapunov_upper(problem, alg, stepsizes, state, reference), state.k)
        return value, kkt_residual(problem, state)

    value0, kkt0 = measure(state0)
    trace = [LyapunovRecord(k=state0.k, value=value0, envelope=value0, kkt=kkt0, wall_ns=0)]
    log.info(f"Running {alg.label} for up to {stop.max_iters} iterations (theta={rate.theta:.6f})")

    state = state0
    start = time.perf_counter_ns()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(stop.max_iters):
            if _should_stop(stop, trace[-1], value0):
                break
            state = step(problem, alg, stepsizes, state, counter)
            if not state.is_finite():
                log.error(f"{alg.label} produced a non-finite iterate at iteration {state.k}")
                raise NonFiniteIterateError(state.k)
            value, kkt = measure(state)
            i = state.k - state0.k
            wall = time.perf_counter_ns() - start if record_wall_time else 0
            trace.append(LyapunovRecord(k=state.k, value=value, envelope=rate.theta ** i * value0,
                                        kkt=kkt, wall_ns=wall))

    log.info(f"{alg.label} stopped after {state.k - state0.k} iterations, KKT residual {trace[-1].kkt:.3e}")
    return state, trace
