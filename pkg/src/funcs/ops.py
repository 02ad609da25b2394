"""Value, gradient, prox and Bregman access for every catalog kind."""
import numpy as np
from typing import Any, Tuple

from ..linops.operator import as_vector
from ..utils.errors import GradientUnavailableError, ProblemShapeError
from .base import FunctionHandle, FunctionKind

K = FunctionKind


def _check_gamma(gamma: float):
    if not gamma > 0:
        raise ProblemShapeError(f"prox parameter must be positive, got {gamma}")


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _quadratic_hessian(F: FunctionHandle) -> np.ndarray:
    return F.A.T @ F.A - F.shift * np.eye(F.dim)


def value(F: FunctionHandle, x: Any) -> float:
    """F(x); +inf for an indicator off its point"""
    x = as_vector(x, F.dim, "x")
    kind = F.kind
    if kind is K.QUADRATIC:
        r = F.A @ x - F.b
        val = 0.5 * float(r @ r) - 0.5 * F.shift * float(x @ x)
    elif kind is K.SCALED_SQ_NORM:
        d = x - F.c
        val = 0.5 * F.mu * float(d @ d)
    elif kind is K.L1:
        val = F.lam * float(np.abs(x).sum())
    elif kind is K.ELASTIC_REG:
        val = 0.5 * F.mu * float(x @ x) + F.lam * float(np.abs(x).sum())
    elif kind is K.INDICATOR_POINT:
        if not np.array_equal(x, F.b):
            return float("inf")
        val = 0.0
    elif kind is K.LINEAR:
        val = float(x @ F.b)
    else:
        val = 0.0
    return val + F.constant


def gradient(F: FunctionHandle, x: Any) -> np.ndarray:
    x = as_vector(x, F.dim, "x")
    kind = F.kind
    if kind is K.QUADRATIC:
        return F.A.T @ (F.A @ x - F.b) - F.shift * x
    if kind is K.SCALED_SQ_NORM:
        return F.mu * (x - F.c)
    if kind is K.LINEAR:
        return np.array(F.b)
    if kind is K.ZERO:
        return np.zeros(F.dim)
    raise GradientUnavailableError(f"gradient unavailable for {kind.value}")


def prox(F: FunctionHandle, gamma: float, v: Any) -> np.ndarray:
    """argmin_w F(w) + ||w - v||^2 / (2 gamma)"""
    _check_gamma(gamma)
    v = as_vector(v, F.dim, "v")
    kind = F.kind
    if kind is K.QUADRATIC:
        lhs = np.eye(F.dim) + gamma * _quadratic_hessian(F)
        return np.linalg.solve(lhs, v + gamma * (F.A.T @ F.b))
    if kind is K.SCALED_SQ_NORM:
        return (v + gamma * F.mu * F.c) / (1.0 + gamma * F.mu)
    if kind is K.L1:
        return _soft_threshold(v, gamma * F.lam)
    if kind is K.ELASTIC_REG:
        return _soft_threshold(v, gamma * F.lam) / (1.0 + gamma * F.mu)
    if kind is K.INDICATOR_POINT:
        return np.array(F.b)
    if kind is K.LINEAR:
        return v - gamma * F.b
    return np.array(v)


def prox_conjugate(F: FunctionHandle, gamma: float, v: Any) -> np.ndarray:
    """Prox of the convex conjugate F*, by Moreau decomposition or its closed form"""
    _check_gamma(gamma)
    v = as_vector(v, F.dim, "v")
    kind = F.kind
    if kind is K.L1:
        return np.clip(v, -F.lam, F.lam)
    if kind is K.INDICATOR_POINT:
        return v - gamma * F.b
    if kind is K.LINEAR:
        return np.array(F.b)
    if kind is K.ZERO:
        return np.zeros(F.dim)
    return v - gamma * prox(F, 1.0 / gamma, v / gamma)


def bregman(F: FunctionHandle, x: Any, y: Any) -> float:
    """D_F(x; y) = F(x) - F(y) - <grad F(y), x - y>"""
    x = as_vector(x, F.dim, "x")
    y = as_vector(y, F.dim, "y")
    kind = F.kind
    d = x - y
    if kind is K.QUADRATIC:
        Ad = F.A @ d
        return max(0.5 * float(Ad @ Ad) - 0.5 * F.shift * float(d @ d), 0.0)
    if kind is K.SCALED_SQ_NORM:
        return 0.5 * F.mu * float(d @ d)
    if kind in (K.LINEAR, K.ZERO):
        return 0.0
    raise GradientUnavailableError(f"Bregman divergence unavailable for {kind.value}")


def _l1_distance(s: np.ndarray, x: np.ndarray, lam: float) -> float:
    on_support = x != 0.0
    r = np.where(on_support, s - lam * np.sign(x), np.maximum(np.abs(s) - lam, 0.0))
    return float(np.linalg.norm(r))


def subgradient_distance(F: FunctionHandle, x: Any, s: Any) -> float:
    """dist(s, dF(x)) with the subdifferential in closed form"""
    x = as_vector(x, F.dim, "x")
    s = as_vector(s, F.dim, "s")
    kind = F.kind
    if F.is_smooth:
        return float(np.linalg.norm(s - gradient(F, x)))
    if kind is K.L1:
        return _l1_distance(s, x, F.lam)
    if kind is K.ELASTIC_REG:
        return _l1_distance(s - F.mu * x, x, F.lam)
    # indicator: the normal cone at b is everything
    return 0.0 if np.array_equal(x, F.b) else float("inf")


def quadratic_form(F: FunctionHandle) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Write a quadratic kind as F(x) = 1/2 x'Hx - q'x + c

    Returns:
        Tuple[np.ndarray, np.ndarray, float]: (H, q, c)
    """
    n = F.dim
    kind = F.kind
    if kind is K.QUADRATIC:
        return _quadratic_hessian(F), F.A.T @ F.b, 0.5 * float(F.b @ F.b) + F.constant
    if kind is K.SCALED_SQ_NORM:
        return F.mu * np.eye(n), F.mu * F.c, 0.5 * F.mu * float(F.c @ F.c) + F.constant
    if kind is K.LINEAR:
        return np.zeros((n, n)), -np.array(F.b), F.constant
    if kind is K.ZERO:
        return np.zeros((n, n)), np.zeros(n), F.constant
    raise ProblemShapeError(f"{kind.value} is not a quadratic")


def transfer_strong_convexity(f: FunctionHandle, g: FunctionHandle) -> Tuple[FunctionHandle, FunctionHandle]:
    """
    Move the strong convexity of f onto g

    Returns f~ = f - (mu_f/2)||.||^2 and g~ = g + (mu_f/2)||.||^2, so that f + g = f~ + g~.

    Args:
        f: Quadratic or ScaledSqNorm with mu_f > 0
        g: Any catalog function on the same space

    Returns:
        Tuple[FunctionHandle, FunctionHandle]: (f~, g~)
    """
    if f.kind not in (K.QUADRATIC, K.SCALED_SQ_NORM):
        raise ProblemShapeError(f"strong convexity transfer needs a quadratic f, got {f.kind.value}")
    if f.dim != g.dim:
        raise ProblemShapeError(f"f and g live on different spaces ({f.dim} vs {g.dim})")
    m = f.strong_convexity
    if m <= 0:
        raise ProblemShapeError("nothing to transfer: mu_f = 0")

    if f.kind is K.QUADRATIC:
        f_new = FunctionHandle.quadratic(f.A, f.b, shift=f.shift + m, constant=f.constant)
    else:
        f_new = FunctionHandle.linear(-f.mu * f.c, constant=f.constant + 0.5 * f.mu * float(f.c @ f.c))

    kind = g.kind
    if kind is K.ZERO:
        g_new = FunctionHandle.scaled_sq_norm(m, dim=g.dim, constant=g.constant)
    elif kind is K.SCALED_SQ_NORM:
        total = g.mu + m
        extra = 0.5 * g.mu * m / total * float(g.c @ g.c)
        g_new = FunctionHandle.scaled_sq_norm(total, g.mu * g.c / total, constant=g.constant + extra)
    elif kind is K.L1:
        g_new = FunctionHandle.elastic(m, g.lam, g.dim, constant=g.constant)
    elif kind is K.ELASTIC_REG:
        g_new = FunctionHandle.elastic(g.mu + m, g.lam, g.dim, constant=g.constant)
    elif kind is K.LINEAR:
        g_new = FunctionHandle.scaled_sq_norm(m, -g.b / m, constant=g.constant - float(g.b @ g.b) / (2 * m))
    elif kind is K.INDICATOR_POINT:
        g_new = FunctionHandle.indicator_point(g.b, constant=g.constant + 0.5 * m * float(g.b @ g.b))
    else:
        g_new = FunctionHandle.quadratic(g.A, g.b, shift=g.shift - m, constant=g.constant)
    return f_new, g_new
