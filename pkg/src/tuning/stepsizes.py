"""Stepsize rules and feasibility constraints for each regime."""
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional

from ..funcs.base import FunctionKind
from ..solvers.base import AlgorithmId, CompositeProblem
from ..utils.errors import InfeasibleStepsizeError

FEASIBILITY_TOL = 1e-12


class Regime(str, Enum):
    TWO_FUNCTION = "two_function"
    SMOOTH_H = "smooth_h"
    NONSMOOTH_H = "nonsmooth_h"
    LINEAR_CONSTRAINT = "linear_constraint"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class StepSizes:
    eta_x: float
    eta_z: float
    regime: Regime
    eta_y: Optional[float] = None

    def __post_init__(self):
        for name in ("eta_x", "eta_z", "eta_y"):
            val = getattr(self, name)
            if val is not None and not (val > 0 and math.isfinite(val)):
                raise InfeasibleStepsizeError(f"{name} must be positive and finite, got {val}")
        if self.eta_y is None and self.regime in (Regime.SMOOTH_H, Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT):
            raise InfeasibleStepsizeError(f"{self.regime.value} stepsizes need eta_y")

    def with_values(self, **values: float) -> "StepSizes":
        return replace(self, **values)

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["regime"] = self.regime.value
        return out


def infer_regime(problem: CompositeProblem) -> Regime:
    if problem.h is None:
        return Regime.TWO_FUNCTION
    if problem.h.kind is FunctionKind.INDICATOR_POINT:
        return Regime.LINEAR_CONSTRAINT
    if problem.h.kind is FunctionKind.SCALED_SQ_NORM:
        return Regime.SMOOTH_H
    return Regime.NONSMOOTH_H


def constraint_values(stepsizes: StepSizes, L_f: float, K_norm: float = 0.0) -> Dict[str, float]:
    """Left-hand sides of the contraction constraints, each of which must be <= 1"""
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    regime = stepsizes.regime
    if regime is Regime.TWO_FUNCTION:
        return {"L_f*eta_x*eta_z": L_f * ex * ez}
    if regime is Regime.SMOOTH_H:
        return {"||K||^2*eta_x*eta_y + L_f*eta_x*eta_z": K_norm ** 2 * ex * ey + L_f * ex * ez}
    if regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT):
        return {
            "8*||K||^2*eta_x*eta_y": 8 * K_norm ** 2 * ex * ey,
            "8*L_f*eta_x*eta_z": 8 * L_f * ex * ez,
        }
    return {}


def is_feasible(stepsizes: StepSizes, L_f: float, K_norm: float = 0.0) -> bool:
    return all(v <= 1 + FEASIBILITY_TOL for v in constraint_values(stepsizes, L_f, K_norm).values())


def check_feasible(stepsizes: StepSizes, L_f: float, K_norm: float = 0.0):
    """Raise InfeasibleStepsizeError naming the first violated constraint"""
    for label, val in constraint_values(stepsizes, L_f, K_norm).items():
        if val > 1 + FEASIBILITY_TOL:
            raise InfeasibleStepsizeError(
                f"{stepsizes.regime.value} contraction constraint {label} <= 1 violated (value {val:.6g})"
            )


def _require_positive(**values: float):
    for name, val in values.items():
        if val is None or not val > 0:
            raise InfeasibleStepsizeError(f"{name} must be positive, got {val}")


def stepsizes_two_function(L_f: float, mu_g: float) -> StepSizes:
    """eta_x = 1/sqrt(L_f mu_g), eta_z = sqrt(mu_g / L_f)"""
    if mu_g is not None and mu_g == 0:
        raise InfeasibleStepsizeError("two-function stepsize rule requires strong convexity mu_g > 0")
    _require_positive(L_f=L_f, mu_g=mu_g)
    return StepSizes(
        eta_x=1.0 / math.sqrt(L_f * mu_g),
        eta_z=math.sqrt(mu_g / L_f),
        regime=Regime.TWO_FUNCTION,
    )


def stepsizes_smooth(L_f: float, mu_g: float, mu_hstar: float, K_norm: float) -> StepSizes:
    """Accelerated stepsizes when h is smooth (h* strongly convex)"""
    _require_positive(L_f=L_f, mu_g=mu_g, mu_hstar=mu_hstar, K_norm=K_norm)
    steps = StepSizes(
        eta_x=min(1.0 / math.sqrt(L_f * mu_g), math.sqrt(mu_hstar / (K_norm ** 2 * mu_g))),
        eta_y=0.5 * math.sqrt(mu_g / (K_norm ** 2 * mu_hstar)),
        eta_z=0.5 * math.sqrt(mu_g / L_f),
        regime=Regime.SMOOTH_H,
    )
    check_feasible(steps, L_f, K_norm)
    return steps


def _stepsizes_lambda(L_f: float, L_g: float, mu_g: float, K_norm: float, lam: float,
                      regime: Regime, lam_name: str) -> StepSizes:
    if lam is None or not lam > 0:
        raise InfeasibleStepsizeError(f"{regime.value} stepsize rule requires {lam_name} > 0, got {lam}")
    _require_positive(L_f=L_f, L_g=L_g, mu_g=mu_g, K_norm=K_norm)
    if L_g < mu_g:
        raise InfeasibleStepsizeError(f"{regime.value} stepsize rule requires L_g >= mu_g, got L_g={L_g}, mu_g={mu_g}")
    eta_x = min(
        1.0 / math.sqrt(L_f * mu_g),
        math.sqrt(lam / K_norm ** 2) / math.sqrt((L_g + L_f) * mu_g),
    )
    steps = StepSizes(
        eta_x=eta_x,
        eta_y=1.0 / (8 * K_norm ** 2 * eta_x),
        eta_z=1.0 / (8 * L_f * eta_x),
        regime=regime,
    )
    check_feasible(steps, L_f, K_norm)
    return steps


def stepsizes_nonsmooth(L_f: float, L_g: float, mu_g: float, K_norm: float, lam_min: float) -> StepSizes:
    return _stepsizes_lambda(L_f, L_g, mu_g, K_norm, lam_min, Regime.NONSMOOTH_H, "lambda_min(KK*)")


def stepsizes_linear_constraint(L_f: float, L_g: float, mu_g: float, K_norm: float,
                                lam_min_pos: float) -> StepSizes:
    return _stepsizes_lambda(L_f, L_g, mu_g, K_norm, lam_min_pos, Regime.LINEAR_CONSTRAINT,
                             "lambda_min_pos(KK*)")


def stepsizes_classical(alg: AlgorithmId, L_f: float, K_norm: float = 0.0) -> StepSizes:
    """
    Conservative textbook stepsizes for the non-accelerated baselines

    Args:
        alg: A baseline algorithm
        L_f: Smoothness of f
        K_norm: ||K|| for primal-dual baselines

    Returns:
        StepSizes: Classical-regime stepsizes (eta_z unused)
    """
    if alg.is_accelerated:
        raise InfeasibleStepsizeError(f"{alg.label} uses corollary stepsizes, not classical ones")
    if alg is AlgorithmId.CP:
        _require_positive(K_norm=K_norm)
        return StepSizes(eta_x=0.99 / K_norm, eta_y=0.99 / K_norm, eta_z=1.0, regime=Regime.CLASSICAL)
    _require_positive(L_f=L_f)
    if alg is AlgorithmId.PGD:
        return StepSizes(eta_x=1.0 / L_f, eta_z=1.0, regime=Regime.CLASSICAL)
    if alg is AlgorithmId.FRB:
        return StepSizes(eta_x=0.99 / (2 * L_f), eta_z=1.0, regime=Regime.CLASSICAL)
    _require_positive(K_norm=K_norm)
    if alg in (AlgorithmId.CV1, AlgorithmId.CV2):
        # 1/eta_x - eta_y ||K||^2 >= L_f / 2
        return StepSizes(eta_x=0.99 / (L_f / 2 + K_norm), eta_y=1.0 / K_norm, eta_z=1.0, regime=Regime.CLASSICAL)
    return StepSizes(eta_x=0.49 / (L_f + K_norm), eta_y=0.49 / K_norm, eta_z=1.0, regime=Regime.CLASSICAL)


def stepsizes_balanced(regime: Regime, L_f: float, K_norm: float = 0.0) -> StepSizes:
    """Equal stepsizes meeting the regime's constraints without any strong convexity

    Used when mu_g (or mu_h*, lambda_min) vanishes and the corollary rules have no answer.
    """
    _require_positive(L_f=L_f)
    if regime is Regime.TWO_FUNCTION:
        eta = 1.0 / math.sqrt(L_f)
        return StepSizes(eta_x=eta, eta_z=eta, regime=regime)
    _require_positive(K_norm=K_norm)
    if regime is Regime.SMOOTH_H:
        eta = 1.0 / math.sqrt(L_f + K_norm ** 2)
    elif regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT):
        eta = 1.0 / math.sqrt(8 * max(L_f, K_norm ** 2))
    else:
        raise InfeasibleStepsizeError(f"no balanced stepsizes for regime {regime.value}")
    return StepSizes(eta_x=eta, eta_y=eta, eta_z=eta, regime=regime)


def stepsizes_for(problem: CompositeProblem, regime: Optional[Regime] = None) -> StepSizes:
    """Corollary stepsizes from the problem's exact constants"""
    regime = regime or infer_regime(problem)
    if regime is Regime.TWO_FUNCTION:
        return stepsizes_two_function(problem.L_f, problem.mu_g)
    if regime is Regime.SMOOTH_H:
        return stepsizes_smooth(problem.L_f, problem.mu_g, problem.mu_hstar, problem.K_norm)
    if problem.L_g is None:
        raise InfeasibleStepsizeError(f"{regime.value} stepsize rule requires a smooth g")
    if regime is Regime.NONSMOOTH_H:
        return stepsizes_nonsmooth(problem.L_f, problem.L_g, problem.mu_g, problem.K_norm,
                                   problem.spectral.lambda_min)
    if regime is Regime.LINEAR_CONSTRAINT:
        return stepsizes_linear_constraint(problem.L_f, problem.L_g, problem.mu_g, problem.K_norm,
                                           problem.spectral.lambda_min_pos)
    raise InfeasibleStepsizeError("classical stepsizes depend on the algorithm; use stepsizes_classical")
