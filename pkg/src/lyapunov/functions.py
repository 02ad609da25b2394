import numpy as np
from dataclasses import dataclass
from typing import Optional

from ..config import get_settings
from ..funcs.ops import bregman, gradient
from ..solvers.base import AlgorithmId, CompositeProblem, SolverState
from ..tuning.stepsizes import StepSizes
from ..utils.errors import LyapunovBoundError
from .reference import ReferenceSolution


@dataclass(frozen=True)
class SignPattern:
    """Signs of the coupling terms: s_Ky on <y - y*, K(x - x*)>, s_fz on <grad f(z) - grad f(z*), x - x*>"""
    s_fz: int
    s_Ky: Optional[int] = None


SIGN_TABLE = {
    AlgorithmId.APGD: SignPattern(s_fz=-1),
    AlgorithmId.APGE: SignPattern(s_fz=+1),
    AlgorithmId.ACV1: SignPattern(s_Ky=-1, s_fz=-1),
    AlgorithmId.ACV2: SignPattern(s_Ky=+1, s_fz=-1),
    AlgorithmId.APDTR1: SignPattern(s_Ky=-1, s_fz=+1),
    AlgorithmId.APDTR2: SignPattern(s_Ky=+1, s_fz=+1),
}


def sign_pattern(alg: AlgorithmId) -> SignPattern:
    """Baselines are measured with the functional of their accelerated counterpart"""
    return SIGN_TABLE[alg.accelerated_counterpart]


def _primal_terms(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState, ref: ReferenceSolution):
    dx = state.x - ref.x_star
    breg = bregman(problem.f, state.z, ref.z_star)
    dgrad = gradient(problem.f, state.z) - gradient(problem.f, ref.z_star)
    return dx, breg, float(dgrad @ dx)


def phi(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
        ref: ReferenceSolution, sign: SignPattern) -> float:
    """(1/2eta_x)||x - x*||^2 + (1/eta_z) D_f(z; z*) + s_fz <grad f(z) - grad f(z*), x - x*>"""
    dx, breg, cross = _primal_terms(problem, stepsizes, state, ref)
    return float(dx @ dx) / (2 * stepsizes.eta_x) + breg / stepsizes.eta_z + sign.s_fz * cross


def psi(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState,
        ref: ReferenceSolution, sign: SignPattern) -> float:
    """phi plus (1/2eta_y)||y - y*||^2 + s_Ky <y - y*, K(x - x*)>"""
    dx, breg, cross = _primal_terms(problem, stepsizes, state, ref)
    dy = state.y - ref.y_star
    coupling = float(dy @ (problem.K.matrix @ dx))
    return (float(dx @ dx) / (2 * stepsizes.eta_x)
            + float(dy @ dy) / (2 * stepsizes.eta_y)
            + breg / stepsizes.eta_z
            + sign.s_Ky * coupling
            + sign.s_fz * cross)


def phi_upper(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState, ref: ReferenceSolution) -> float:
    dx = state.x - ref.x_star
    return float(dx @ dx) / stepsizes.eta_x + 2 * bregman(problem.f, state.z, ref.z_star) / stepsizes.eta_z


def psi_upper(problem: CompositeProblem, stepsizes: StepSizes, state: SolverState, ref: ReferenceSolution) -> float:
    dy = state.y - ref.y_star
    return phi_upper(problem, stepsizes, state, ref) + float(dy @ dy) / stepsizes.eta_y


def lyapunov_value(problem: CompositeProblem, alg: AlgorithmId, stepsizes: StepSizes,
                   state: SolverState, ref: ReferenceSolution) -> float:
    if alg.is_primal_dual:
        return psi(problem, stepsizes, state, ref, sign_pattern(alg))
    return phi(problem, stepsizes, state, ref, sign_pattern(alg))


def lyapunov_upper(problem: CompositeProblem, alg: AlgorithmId, stepsizes: StepSizes,
                   state: SolverState, ref: ReferenceSolution) -> float:
    if alg.is_primal_dual:
        return psi_upper(problem, stepsizes, state, ref)
    return phi_upper(problem, stepsizes, state, ref)


def sandwich_applies(problem: CompositeProblem, alg: AlgorithmId, stepsizes: StepSizes) -> bool:
    """Whether the stepsizes satisfy the hypothesis under which 0 <= value <= upper"""
    coupling = problem.L_f * stepsizes.eta_x * stepsizes.eta_z
    if alg.is_primal_dual:
        coupling += problem.K_norm ** 2 * stepsizes.eta_x * stepsizes.eta_y
    return coupling <= 1 + 1e-12


def check_sandwich(value: float, upper: float, k: int, tol: Optional[float] = None):
    tol = get_settings().NONNEG_TOL if tol is None else tol
    slack = tol * (1.0 + abs(upper))
    if value < -slack or value > upper + slack:
        raise LyapunovBoundError(f"Lyapunov value {value:.6e} outside [0, {upper:.6e}] at iteration {k}")


def random_feasible_state(problem: CompositeProblem, rng: np.random.Generator, scale: float = 1.0) -> SolverState:
    """Random iterate triple, used by the sandwich property checks"""
    x = scale * rng.standard_normal(problem.d_x)
    z = scale * rng.standard_normal(problem.d_x)
    y = scale * rng.standard_normal(problem.d_y) if problem.is_primal_dual else None
    return SolverState(x=x, y=y, z=z, k=0)
