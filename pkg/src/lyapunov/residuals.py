"""KKT residual of the optimality system in z-variables."""
import math
from typing import Dict

import numpy as np

from ..funcs.base import FunctionKind
from ..funcs.ops import gradient, prox, prox_conjugate, subgradient_distance
from ..linops.operator import distance_to_range
from ..solvers.base import CompositeProblem, SolverState


def kkt_components(problem: CompositeProblem, state: SolverState) -> Dict[str, float]:
    """
    Labelled violations of the optimality system

    Returns:
        Dict[str, float]: ``g`` dist(-K*y - grad f(z), dg(x)), or ||x - b|| when g is a point
        indicator; ``h`` the prox fixed-point residual of h* (equal to ||Kx - b|| for a
        constraint); ``z`` ||x - z||; ``range`` dist(y, ran K) for constrained problems
    """
    s = -gradient(problem.f, state.z)
    parts: Dict[str, float] = {}
    if problem.is_primal_dual:
        K = problem.K.matrix
        s = s - K.T @ state.y
        Kx = K @ state.x
        parts["h"] = float(np.linalg.norm(state.y - prox_conjugate(problem.h, 1.0, state.y + Kx)))
        if problem.is_linearly_constrained:
            parts["range"] = distance_to_range(problem.K, state.y)
    if problem.g.kind is FunctionKind.INDICATOR_POINT:
        # normal cone of a point is everything; measure feasibility instead
        parts["g"] = float(np.linalg.norm(state.x - prox(problem.g, 1.0, state.x + s)))
    else:
        parts["g"] = subgradient_distance(problem.g, state.x, s)
    parts["z"] = float(np.linalg.norm(state.x - state.z))
    return parts


def kkt_residual(problem: CompositeProblem, state: SolverState) -> float:
    return math.sqrt(sum(v * v for v in kkt_components(problem, state).values()))
