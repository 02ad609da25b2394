"""High-accuracy solutions of the optimality system, independent of the solver iterations."""
import numpy as np
from dataclasses import dataclass
from typing import List, Optional, Tuple
from loguru import logger
from scipy.optimize import lsq_linear

from ..config import get_settings
from ..funcs.base import FunctionKind, SMOOTH_KINDS
from ..funcs.ops import gradient, prox, prox_conjugate, quadratic_form
from ..solvers.base import CompositeProblem, SolverState
from ..utils.errors import ReferenceSolveError
from .residuals import kkt_residual

K_ = FunctionKind
RESIDUAL_CHECK_EVERY = 100


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    x_star: np.ndarray
    y_star: Optional[np.ndarray]
    z_star: np.ndarray
    kkt_residual: float
    method: str = "direct"

    def as_state(self) -> SolverState:
        y = None if self.y_star is None else np.array(self.y_star)
        return SolverState(x=np.array(self.x_star), y=y, z=np.array(self.z_star), k=0)


def _residual(problem: CompositeProblem, x: np.ndarray, y: Optional[np.ndarray]) -> float:
    return kkt_residual(problem, SolverState(x=x, y=y, z=x, k=0))


class _Assembly:
    """f + g + h(K.) split into a quadratic 1/2 x'Hx - q'x, weighted l1 rows and an equality constraint"""

    def __init__(self, problem: CompositeProblem):
        n = problem.d_x
        self.H, self.q, _ = quadratic_form(problem.f)
        self.H = self.H.copy()
        self.q = self.q.copy()
        self.rows: List[Tuple[np.ndarray, np.ndarray, str]] = []
        self.constraint: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self.supported = True

        g = problem.g
        if g.kind in SMOOTH_KINDS:
            Hg, qg, _ = quadratic_form(g)
            self.H += Hg
            self.q += qg
        elif g.kind in (K_.L1, K_.ELASTIC_REG):
            self.H += g.mu * np.eye(n)
            self.rows.append((np.eye(n), np.full(n, g.lam), "g"))
        else:
            self.supported = False

        h = problem.h
        if h is not None:
            Km = problem.K.matrix
            if h.kind in SMOOTH_KINDS:
                Hh, qh, _ = quadratic_form(h)
                self.H += Km.T @ Hh @ Km
                self.q += Km.T @ qh
            elif h.kind in (K_.L1, K_.ELASTIC_REG):
                self.H += h.mu * (Km.T @ Km)
                self.rows.append((Km, np.full(problem.d_y, h.lam), "h"))
            else:
                self.constraint = (Km, np.array(h.b))

        self.rows = [r for r in self.rows if np.any(r[1] > 0)]
        if self.rows and self.constraint is not None:
            self.supported = False


def _dual_box_solve(H: np.ndarray, q: np.ndarray, M: np.ndarray, bounds: np.ndarray) -> Optional[np.ndarray]:
    """min_w 1/2 ||L^{-1}(q - M'w)||^2 s.t. |w| <= bounds, with H = LL'"""
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    C = np.linalg.solve(L, M.T)
    d = np.linalg.solve(L, q)
    res = lsq_linear(C, d, bounds=(-bounds, bounds), method="bvls", tol=1e-14)
    w = np.clip(res.x, -bounds, bounds)

    # Re-solve the free coordinates exactly with the active set fixed
    free = np.abs(w) < bounds * (1 - 1e-9)
    if np.any(free):
        rhs = d - C[:, ~free] @ w[~free]
        w_free, *_ = np.linalg.lstsq(C[:, free], rhs, rcond=None)
        if np.all(np.abs(w_free) <= bounds[free]):
            w = w.copy()
            w[free] = w_free
    return w


def _solve_direct(problem: CompositeProblem) -> Optional[Tuple[np.ndarray, Optional[np.ndarray], str]]:
    asm = _Assembly(problem)
    if not asm.supported:
        return None
    H, q = asm.H, asm.q

    if asm.constraint is not None:
        Km, b = asm.constraint
        m = Km.shape[0]
        kkt = np.block([[H, Km.T], [Km, np.zeros((m, m))]])
        sol, *_ = np.linalg.lstsq(kkt, np.concatenate([q, b]), rcond=None)
        return sol[:problem.d_x], sol[problem.d_x:], "kkt-lstsq"

    if not asm.rows:
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            return None
        x = np.linalg.solve(H, q)
        return x, _dual_from_smooth_h(problem, x), "linear-solve"

    M = np.vstack([r[0] for r in asm.rows])
    bounds = np.concatenate([r[1] for r in asm.rows])
    w = _dual_box_solve(H, q, M, bounds)
    if w is None:
        return None
    x = np.linalg.solve(H, q - M.T @ w)

    # Complementarity: coordinates whose multiplier is strictly inside the box vanish
    offset = 0
    y = _dual_from_smooth_h(problem, x)
    for mat, lam, owner in asm.rows:
        size = mat.shape[0]
        w_part = w[offset:offset + size]
        if owner == "g":
            interior = np.abs(w_part) < lam * (1 - 1e-9)
            x = np.where(interior, 0.0, x)
        else:
            y = w_part + problem.h.mu * (problem.K.matrix @ x)
        offset += size
    return x, y, "dual-bvls"


def _dual_from_smooth_h(problem: CompositeProblem, x: np.ndarray) -> Optional[np.ndarray]:
    if problem.h is None:
        return None
    if problem.h.kind in SMOOTH_KINDS:
        return gradient(problem.h, problem.K.matrix @ x)
    return None


def _solve_iterative(problem: CompositeProblem, tol: float, max_iters: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Conservative Condat-Vu (or proximal gradient) loop on the raw oracles"""
    f, g, h = problem.f, problem.g, problem.h
    x = np.zeros(problem.d_x)
    L_f = max(problem.L_f, 1e-12)
    if h is None:
        eta = 1.0 / L_f
        for it in range(1, max_iters + 1):
            x = prox(g, eta, x - eta * gradient(f, x))
            if it % RESIDUAL_CHECK_EVERY == 0 and _residual(problem, x, None) <= tol:
                break
        return x, None

    Km = problem.K.matrix
    K_norm = max(problem.K_norm, 1e-12)
    eta_y = 1.0 / K_norm
    eta_x = 0.99 / (L_f / 2 + K_norm)
    y = np.zeros(problem.d_y)
    for it in range(1, max_iters + 1):
        x_new = prox(g, eta_x, x - eta_x * (Km.T @ y + gradient(f, x)))
        y = prox_conjugate(h, eta_y, y + eta_y * (Km @ (2 * x_new - x)))
        x = x_new
        if it % RESIDUAL_CHECK_EVERY == 0 and _residual(problem, x, y) <= tol:
            break
    return x, y


def solve_reference(problem: CompositeProblem,
                    tol: Optional[float] = None,
                    max_iters: Optional[int] = None) -> ReferenceSolution:
    """
    Solve the optimality system to KKT residual <= tol

    Quadratic f with quadratic, elastic or l1 g and h (or an equality constraint) is solved
    directly; anything else falls back to a long conservative Condat-Vu run.

    Args:
        problem: Composite problem
        tol: Target KKT residual
        max_iters: Iteration budget for the fallback loop

    Returns:
        ReferenceSolution: (x*, y*, z* = x*) with its achieved residual
    """
    settings = get_settings()
    tol = settings.REFERENCE_TOL if tol is None else tol
    max_iters = settings.REFERENCE_MAX_ITERS if max_iters is None else max_iters

    direct = _solve_direct(problem)
    if direct is not None:
        x, y, method = direct
        residual = _residual(problem, x, y)
        if residual <= tol:
            logger.debug(f"Reference solved by {method}, KKT residual {residual:.3e}")
            return ReferenceSolution(x_star=x, y_star=y, z_star=x.copy(), kkt_residual=residual, method=method)
        logger.warning(f"Direct reference solve ({method}) reached only {residual:.3e}; iterating instead")

    x, y = _solve_iterative(problem, tol, max_iters)
    residual = _residual(problem, x, y)
    if residual > tol:
        raise ReferenceSolveError(residual, f"reference KKT residual {residual:.3e} above {tol:.1e} after {max_iters} iterations")
    logger.debug(f"Reference solved iteratively, KKT residual {residual:.3e}")
    return ReferenceSolution(x_star=x, y_star=y, z_star=x.copy(), kkt_residual=residual, method="iterative")
