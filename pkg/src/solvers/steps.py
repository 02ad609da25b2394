"""One iteration of each method: pure functions from state to state."""
import numpy as np
from typing import Callable, Dict, Optional

from ..funcs.base import SMOOTH_KINDS
from ..funcs.ops import gradient, prox, prox_conjugate, quadratic_form
from ..tuning.stepsizes import StepSizes
from ..utils.errors import ProblemShapeError
from ..utils.metrics import OracleCounter, bump
from .base import AlgorithmId, CompositeProblem, SolverState, check_compatible

Counter = Optional[OracleCounter]


def _grad(problem: CompositeProblem, z: np.ndarray, counter: Counter) -> np.ndarray:
    bump(counter, "grad_f")
    return gradient(problem.f, z)


def _prox_g(problem: CompositeProblem, gamma: float, v: np.ndarray, counter: Counter) -> np.ndarray:
    bump(counter, "prox_g")
    return prox(problem.g, gamma, v)


def _prox_hconj(problem: CompositeProblem, gamma: float, v: np.ndarray, counter: Counter) -> np.ndarray:
    bump(counter, "prox_hconj")
    return prox_conjugate(problem.h, gamma, v)


def _K(problem: CompositeProblem, x: np.ndarray, counter: Counter) -> np.ndarray:
    bump(counter, "k_apply")
    return problem.K.matrix @ x


def _Kt(problem: CompositeProblem, y: np.ndarray, counter: Counter) -> np.ndarray:
    bump(counter, "k_adjoint")
    return problem.K.matrix.T @ y


def _damp(z: np.ndarray, target: np.ndarray, eta_z: float) -> np.ndarray:
    """z/(1 + eta_z) + eta_z * target/(1 + eta_z)"""
    return z / (1.0 + eta_z) + (eta_z / (1.0 + eta_z)) * target


def _grad_z(problem: CompositeProblem, state: SolverState, counter: Counter) -> np.ndarray:
    if state.grad_z is not None:
        return state.grad_z
    return _grad(problem, state.z, counter)


# Accelerated methods

def step_apgd(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
              counter: Counter = None) -> SolverState:
    ex, ez = stepsizes.eta_x, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    x = _prox_g(problem, ex, state.x - ex * gz, counter)
    z = _damp(state.z, 2 * x - state.x, ez)
    return SolverState(x=x, y=None, z=z, k=state.k + 1, grad_z=_grad(problem, z, counter))


def step_apge(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
              counter: Counter = None) -> SolverState:
    ex, ez = stepsizes.eta_x, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    z = _damp(state.z, state.x, ez)
    gz_new = _grad(problem, z, counter)
    x = _prox_g(problem, ex, state.x - ex * (2 * gz_new - gz), counter)
    return SolverState(x=x, y=None, z=z, k=state.k + 1, grad_z=gz_new)


def step_acv1(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
              counter: Counter = None) -> SolverState:
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    x = _prox_g(problem, ex, state.x - ex * _Kt(problem, state.y, counter) - ex * gz, counter)
    x_bar = 2 * x - state.x
    y = _prox_hconj(problem, ey, state.y + ey * _K(problem, x_bar, counter), counter)
    z = _damp(state.z, x_bar, ez)
    return SolverState(x=x, y=y, z=z, k=state.k + 1, grad_z=_grad(problem, z, counter))


def step_acv2(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
              counter: Counter = None) -> SolverState:
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    y = _prox_hconj(problem, ey, state.y + ey * _K(problem, state.x, counter), counter)
    x = _prox_g(problem, ex, state.x - ex * _Kt(problem, 2 * y - state.y, counter) - ex * gz, counter)
    z = _damp(state.z, 2 * x - state.x, ez)
    return SolverState(x=x, y=y, z=z, k=state.k + 1, grad_z=_grad(problem, z, counter))


def step_apdtr1(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
                counter: Counter = None) -> SolverState:
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    z = _damp(state.z, state.x, ez)
    gz_new = _grad(problem, z, counter)
    x = _prox_g(problem, ex,
                state.x - ex * _Kt(problem, state.y, counter) - ex * (2 * gz_new - gz), counter)
    y = _prox_hconj(problem, ey, state.y + ey * _K(problem, 2 * x - state.x, counter), counter)
    return SolverState(x=x, y=y, z=z, k=state.k + 1, grad_z=gz_new)


def step_apdtr2(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
                counter: Counter = None) -> SolverState:
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    gz = _grad_z(problem, state, counter)
    y = _prox_hconj(problem, ey, state.y + ey * _K(problem, state.x, counter), counter)
    z = _damp(state.z, state.x, ez)
    gz_new = _grad(problem, z, counter)
    x = _prox_g(problem, ex,
                state.x - ex * _Kt(problem, 2 * y - state.y, counter) - ex * (2 * gz_new - gz), counter)
    return SolverState(x=x, y=y, z=z, k=state.k + 1, grad_z=gz_new)


# Baselines: z is kept equal to x, grad_z caches grad f(x^k), grad_prev caches grad f(x^{k-1})

def _next_baseline(x: np.ndarray, y: Optional[np.ndarray], state: SolverState, gx: np.ndarray,
                   problem: CompositeProblem, counter: Counter, keep_prev: bool) -> SolverState:
    return SolverState(x=x, y=y, z=x, k=state.k + 1,
                       grad_z=_grad(problem, x, counter),
                       grad_prev=gx if keep_prev else None)


def _prox_f_plus_g(problem: CompositeProblem, gamma: float, v: np.ndarray, counter: Counter) -> np.ndarray:
    """Prox of f + g when both are quadratics"""
    if problem.g.kind not in SMOOTH_KINDS:
        raise ProblemShapeError(f"CP folds f into g's prox, which needs a quadratic g, got {problem.g.kind.value}")
    bump(counter, "prox_g")
    Hf, qf, _ = quadratic_form(problem.f)
    Hg, qg, _ = quadratic_form(problem.g)
    lhs = np.eye(problem.d_x) + gamma * (Hf + Hg)
    return np.linalg.solve(lhs, v + gamma * (qf + qg))


def step_baseline(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
                  alg: AlgorithmId, counter: Counter = None) -> SolverState:
    """
    One iteration of a non-accelerated baseline

    Args:
        problem: Composite problem
        stepsizes: eta_x (and eta_y for primal-dual baselines)
        state: Current iterates; x^{-1} = x^0 unless grad_prev is primed
        alg: PGD, FRB, CV1, CV2, PDTR1, PDTR2 or CP
        counter: Optional oracle counter

    Returns:
        SolverState: The next iterates
    """
    if alg.is_accelerated:
        raise ProblemShapeError(f"{alg.label} is not a baseline")
    check_compatible(problem, alg)
    ex, ey = stepsizes.eta_x, stepsizes.eta_y
    x0, y0 = state.x, state.y

    if alg is AlgorithmId.CP:
        x = _prox_f_plus_g(problem, ex, x0 - ex * _Kt(problem, y0, counter), counter)
        y = _prox_hconj(problem, ey, y0 + ey * _K(problem, 2 * x - x0, counter), counter)
        return SolverState(x=x, y=y, z=x, k=state.k + 1)

    gx = state.grad_z if state.grad_z is not None else _grad(problem, x0, counter)
    if alg in (AlgorithmId.FRB, AlgorithmId.PDTR1, AlgorithmId.PDTR2):
        g_prev = state.grad_prev if state.grad_prev is not None else gx
        direction = 2 * gx - g_prev
        keep_prev = True
    else:
        direction = gx
        keep_prev = False

    if alg in (AlgorithmId.PGD, AlgorithmId.FRB):
        x = _prox_g(problem, ex, x0 - ex * direction, counter)
        return _next_baseline(x, None, state, gx, problem, counter, keep_prev)

    if alg in (AlgorithmId.CV1, AlgorithmId.PDTR1):
        x = _prox_g(problem, ex, x0 - ex * _Kt(problem, y0, counter) - ex * direction, counter)
        y = _prox_hconj(problem, ey, y0 + ey * _K(problem, 2 * x - x0, counter), counter)
        return _next_baseline(x, y, state, gx, problem, counter, keep_prev)

    # CV2 / PDTR2: dual first
    y = _prox_hconj(problem, ey, y0 + ey * _K(problem, x0, counter), counter)
    x = _prox_g(problem, ex, x0 - ex * _Kt(problem, 2 * y - y0, counter) - ex * direction, counter)
    return _next_baseline(x, y, state, gx, problem, counter, keep_prev)


ACCELERATED_STEPS: Dict[AlgorithmId, Callable[..., SolverState]] = {
    AlgorithmId.APGD: step_apgd,
    AlgorithmId.APGE: step_apge,
    AlgorithmId.ACV1: step_acv1,
    AlgorithmId.ACV2: step_acv2,
    AlgorithmId.APDTR1: step_apdtr1,
    AlgorithmId.APDTR2: step_apdtr2,
}


def step(problem: CompositeProblem, alg: AlgorithmId, stepsizes: StepSizes, state: SolverState,
         counter: Counter = None) -> SolverState:
    if alg in ACCELERATED_STEPS:
        return ACCELERATED_STEPS[alg](problem, stepsizes, state, counter)
    return step_baseline(problem, stepsizes, state, alg, counter)
