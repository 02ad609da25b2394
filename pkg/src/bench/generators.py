import numpy as np
from typing import Optional, Sequence
from loguru import logger

from ..funcs.base import FunctionHandle
from ..funcs.ops import transfer_strong_convexity
from ..linops.operator import LinearMap, spectral_summary
from ..solvers.base import CompositeProblem
from ..tuning.stepsizes import Regime
from ..utils.errors import ProblemShapeError
from .prng import SplitMix64

MAX_REDRAWS = 10


class ProblemFactory:
    """Fluent builder for seeded composite problems"""

    def __init__(self, seed: int = 0):
        self.rng = SplitMix64(seed)
        self.f: Optional[FunctionHandle] = None
        self.g: Optional[FunctionHandle] = None
        self.h: Optional[FunctionHandle] = None
        self.K: Optional[LinearMap] = None

    def quadratic_f(self, dim: int, L: float, mu: float = 0.0) -> "ProblemFactory":
        """1/2||Ax - b||^2 with the spectrum of A*A spread evenly over [mu, L]"""
        eigs = np.array([L]) if dim == 1 else np.linspace(mu, L, dim)
        Q = self.rng.orthogonal(dim)
        A = np.sqrt(eigs)[:, None] * Q.T
        self.f = FunctionHandle.quadratic(A, self.rng.normal(dim))
        return self

    def elastic_g(self, dim: int, mu: float, lam: float) -> "ProblemFactory":
        self.g = FunctionHandle.elastic(mu, lam, dim)
        return self

    def scaled_g(self, dim: int, mu: float) -> "ProblemFactory":
        self.g = FunctionHandle.scaled_sq_norm(mu, self.rng.normal(dim))
        return self

    def zero_g(self, dim: int) -> "ProblemFactory":
        self.g = FunctionHandle.zero(dim)
        return self

    def random_K(self, rows: int, cols: int, full_row_rank: bool = False) -> "ProblemFactory":
        """Gaussian K scaled by 1/sqrt(cols); redrawn until full row rank when requested"""
        for attempt in range(1, MAX_REDRAWS + 1):
            K = LinearMap(self.rng.normal_matrix(rows, cols) / np.sqrt(cols))
            if not full_row_rank or spectral_summary(K).lambda_min > 0:
                self.K = K
                return self
            logger.warning(f"Random {rows}x{cols} K is rank deficient, redrawing ({attempt}/{MAX_REDRAWS})")
        raise ProblemShapeError(f"no full-row-rank {rows}x{cols} K after {MAX_REDRAWS} draws")

    def spectral_K(self, rows: int, cols: int, singular_values: Sequence[float]) -> "ProblemFactory":
        """K = U diag(s) V' with prescribed singular values (fewer than rows gives a rank-deficient K)"""
        s = np.asarray(singular_values, dtype=float)
        r = s.shape[0]
        if r > min(rows, cols):
            raise ProblemShapeError(f"{r} singular values do not fit a {rows}x{cols} operator")
        U = self.rng.orthogonal(rows)[:, :r]
        V = self.rng.orthogonal(cols)[:, :r]
        self.K = LinearMap((U * s) @ V.T)
        return self

    def smooth_h(self, mu_hstar: float) -> "ProblemFactory":
        """h = (1/(2 mu_hstar))||. - c||^2, so h* is mu_hstar-strongly convex"""
        self._need_K()
        self.h = FunctionHandle.scaled_sq_norm(1.0 / mu_hstar, self.rng.normal(self.K.rows))
        return self

    def l1_h(self, lam: float) -> "ProblemFactory":
        self._need_K()
        self.h = FunctionHandle.l1(lam, self.K.rows)
        return self

    def constraint_h(self, x_feasible: Optional[np.ndarray] = None) -> "ProblemFactory":
        """h = indicator of {b} with b = K x_feasible, so b lies in ran(K)"""
        self._need_K()
        if x_feasible is None:
            x_feasible = self.rng.normal(self.K.cols)
        self.h = FunctionHandle.indicator_point(self.K.matrix @ x_feasible)
        return self

    def transfer(self) -> "ProblemFactory":
        """Move mu_f onto g when f has any"""
        if self.f is not None and self.f.strong_convexity > 0:
            self.f, self.g = transfer_strong_convexity(self.f, self.g)
        return self

    def build(self) -> CompositeProblem:
        if self.f is None or self.g is None:
            raise ProblemShapeError("a problem needs at least f and g")
        return CompositeProblem(f=self.f, g=self.g, h=self.h, K=self.K if self.h is not None else None)

    def _need_K(self):
        if self.K is None:
            raise ProblemShapeError("set K before h")


def generate_problem(regime: Regime,
                     d_x: int,
                     d_y: int,
                     seed: int,
                     conditioning: float,
                     mu_g: float = 1.0,
                     mu_hstar: float = 1.0,
                     l1_weight: float = 0.1,
                     lam_min: Optional[float] = None,
                     rank: Optional[int] = None,
                     mu_f: float = 0.0,
                     transfer: bool = False) -> CompositeProblem:
    """
    Seeded instance realizing the hypotheses of a regime

    Args:
        regime: Which problem family to draw from
        d_x: Primal dimension
        d_y: Dual dimension (ignored for two_function)
        seed: PRNG seed
        conditioning: L_f; with mu_g = 1 this is L_f / mu_g
        mu_g: Strong convexity of g
        mu_hstar: Strong convexity of h* (smooth_h)
        l1_weight: Weight of the l1 terms
        lam_min: Prescribed lambda_min(KK*) with ||K|| = 1 (nonsmooth_h, linear_constraint)
        rank: Rank of K for rank-deficient constrained instances
        mu_f: Smallest eigenvalue of the quadratic f
        transfer: Move mu_f from f to g

    Returns:
        CompositeProblem: The generated instance
    """
    if d_x < 1 or d_y < 1:
        raise ProblemShapeError(f"dimensions must be positive, got d_x={d_x}, d_y={d_y}")
    regime = Regime(regime)
    factory = ProblemFactory(seed).quadratic_f(d_x, conditioning, mu_f)

    if regime is Regime.TWO_FUNCTION:
        factory.elastic_g(d_x, mu_g, l1_weight)
    elif regime is Regime.SMOOTH_H:
        factory.elastic_g(d_x, mu_g, l1_weight).random_K(d_y, d_x).smooth_h(mu_hstar)
    elif regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT):
        if d_y > d_x:
            raise ProblemShapeError(f"{regime.value} needs d_y <= d_x, got d_y={d_y}, d_x={d_x}")
        factory.scaled_g(d_x, mu_g)
        if rank is not None:
            floor = np.sqrt(lam_min) if lam_min else 0.5
            factory.spectral_K(d_y, d_x, np.linspace(1.0, floor, rank))
        elif lam_min is not None:
            factory.spectral_K(d_y, d_x, np.linspace(1.0, np.sqrt(lam_min), d_y))
        else:
            factory.random_K(d_y, d_x, full_row_rank=True)
        if regime is Regime.NONSMOOTH_H:
            factory.l1_h(l1_weight)
        else:
            factory.constraint_h()
    else:
        raise ProblemShapeError(f"no generator for regime {regime.value}")

    if transfer:
        factory.transfer()
    problem = factory.build()
    logger.debug(f"Generated {regime.value} problem d_x={d_x} d_y={problem.d_y} seed={seed}")
    return problem
