"""Contraction factors and iteration-complexity predictions."""
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

from ..solvers.base import CompositeProblem
from .stepsizes import Regime, StepSizes


@dataclass(frozen=True)
class RateBound:
    """theta = max(components); no_linear_rate marks theta = 1 from a vanishing modulus"""
    theta: float
    components: Tuple[Tuple[str, float], ...]
    no_linear_rate: bool = False

    def component(self, label: str) -> float:
        return dict(self.components)[label]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "theta": self.theta,
            "components": dict(self.components),
            "no_linear_rate": self.no_linear_rate,
        }


def _bound(components: Sequence[Tuple[str, float]], flagged: bool) -> RateBound:
    comps = tuple((label, float(val)) for label, val in components)
    theta = 1.0 if flagged else max(val for _, val in comps)
    return RateBound(theta=theta, components=comps, no_linear_rate=flagged or theta >= 1.0)


def theta_two_function(stepsizes: StepSizes, mu_g: float) -> RateBound:
    return _bound([
        ("primal", 1.0 / (1.0 + mu_g * stepsizes.eta_x)),
        ("z-damping", 2.0 / (2.0 + stepsizes.eta_z)),
    ], flagged=mu_g <= 0)


def theta_smooth(stepsizes: StepSizes, mu_g: float, mu_hstar: float) -> RateBound:
    return _bound([
        ("primal", 1.0 / (1.0 + mu_g * stepsizes.eta_x)),
        ("dual", 1.0 / (1.0 + mu_hstar * stepsizes.eta_y)),
        ("z-damping", 2.0 / (2.0 + stepsizes.eta_z)),
    ], flagged=mu_g <= 0 or mu_hstar <= 0)


def theta_nonsmooth(stepsizes: StepSizes, mu_g: float, L_g: float, L_f: float, lam_min: float) -> RateBound:
    ex, ey, ez = stepsizes.eta_x, stepsizes.eta_y, stepsizes.eta_z
    lam = max(lam_min or 0.0, 0.0)
    return _bound([
        ("primal", 2.0 / (2.0 + mu_g * ex)),
        ("dual-coupling", 40.0 / (40.0 + lam * ex * ey)),
        ("dual-smoothness", 20.0 / (20.0 + lam / (L_g + L_f) * ey)),
        ("z-damping", 2.0 / (2.0 + ez)),
    ], flagged=mu_g <= 0 or lam <= 0)


def rate_for(problem: CompositeProblem, stepsizes: StepSizes) -> RateBound:
    """theta for the regime the stepsizes were resolved under"""
    regime = stepsizes.regime
    if regime is Regime.TWO_FUNCTION:
        return theta_two_function(stepsizes, problem.mu_g)
    if regime is Regime.SMOOTH_H:
        return theta_smooth(stepsizes, problem.mu_g, problem.mu_hstar)
    if regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT) and problem.L_g is not None:
        lam = problem.spectral.lambda_min if regime is Regime.NONSMOOTH_H else problem.spectral.lambda_min_pos
        return theta_nonsmooth(stepsizes, problem.mu_g, problem.L_g, problem.L_f, lam)
    return RateBound(theta=1.0, components=(), no_linear_rate=True)


def iterations_bound(rate: RateBound, eps: float) -> Optional[int]:
    """ceil(1/(1-theta)) * log(1/eps), which guarantees theta^k <= eps"""
    if rate.theta >= 1.0:
        return None
    return math.ceil(math.ceil(1.0 / (1.0 - rate.theta)) * math.log(1.0 / eps))


def iterations_exact(rate: RateBound, eps: float) -> Optional[int]:
    """Smallest k with theta^k <= eps"""
    if rate.theta >= 1.0:
        return None
    return max(math.ceil(math.log(eps) / math.log(rate.theta)), 0)


def complexity_trend(problem: CompositeProblem, regime: Regime, eps: float) -> Optional[float]:
    """The corollary complexity expression for this regime, without hidden constants"""
    L_f, mu_g = problem.L_f, problem.mu_g
    if mu_g <= 0 or L_f <= 0:
        return None
    log_term = math.log(1.0 / eps)
    if regime is Regime.TWO_FUNCTION:
        return (1.0 + math.sqrt(L_f / mu_g)) * log_term
    K_norm = problem.K_norm
    if regime is Regime.SMOOTH_H:
        if problem.mu_hstar <= 0:
            return None
        return (math.sqrt(L_f / mu_g) + math.sqrt(K_norm ** 2 / (mu_g * problem.mu_hstar))) * log_term
    if regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT) and problem.L_g is not None:
        lam = problem.spectral.lambda_min if regime is Regime.NONSMOOTH_H else problem.spectral.lambda_min_pos
        if not lam:
            return None
        return (math.sqrt((L_f + problem.L_g) / mu_g) * K_norm / math.sqrt(lam) + K_norm ** 2 / lam) * log_term
    return None
