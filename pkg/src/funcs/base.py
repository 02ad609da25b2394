import numpy as np
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from ..linops.operator import LinearMap, spectral_summary
from ..utils.errors import ProblemShapeError

# Relative slack when checking convexity of shifted quadratics.
CONVEXITY_SLACK = 1e-12


class FunctionKind(Enum):
    """Closed catalog of convex functions"""
    QUADRATIC = "quadratic"
    SCALED_SQ_NORM = "scaled_sq_norm"
    L1 = "l1"
    ELASTIC_REG = "elastic_reg"
    INDICATOR_POINT = "indicator_point"
    LINEAR = "linear"
    ZERO = "zero"


SMOOTH_KINDS = frozenset({
    FunctionKind.QUADRATIC,
    FunctionKind.SCALED_SQ_NORM,
    FunctionKind.LINEAR,
    FunctionKind.ZERO,
})


@dataclass(frozen=True)
class SmoothProfile:
    """Smoothness constant L and strong convexity modulus mu"""
    L: float
    mu: float = 0.0

    def __post_init__(self):
        if self.L < 0 or self.mu < 0:
            raise ProblemShapeError(f"profile constants must be nonnegative, got L={self.L}, mu={self.mu}")
        if self.mu > self.L * (1 + CONVEXITY_SLACK) + CONVEXITY_SLACK:
            raise ProblemShapeError(f"profile requires mu <= L, got L={self.L}, mu={self.mu}")


def _frozen(arr: Any) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FunctionHandle:
    """An immutable member of the function catalog

    Parameters not used by a kind stay at their defaults. ``shift`` only applies to
    QUADRATIC and subtracts (shift/2)||x||^2; ``constant`` is added to every value.
    """
    kind: FunctionKind
    dim: int
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    mu: float = 0.0
    lam: float = 0.0
    shift: float = 0.0
    constant: float = 0.0
    profile: Optional[SmoothProfile] = None

    @property
    def is_smooth(self) -> bool:
        return self.kind in SMOOTH_KINDS

    @property
    def strong_convexity(self) -> float:
        if self.profile is not None:
            return self.profile.mu
        if self.kind is FunctionKind.ELASTIC_REG:
            return self.mu
        return 0.0

    @property
    def smoothness(self) -> Optional[float]:
        return self.profile.L if self.profile is not None else None

    # Constructors

    @classmethod
    def quadratic(cls, A: Any, b: Any, shift: float = 0.0, constant: float = 0.0) -> "FunctionHandle":
        """1/2 ||Ax - b||^2 - (shift/2) ||x||^2"""
        A = _frozen(A)
        b = _frozen(b)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ProblemShapeError(f"quadratic needs A (m, n) and b (m,), got {A.shape} and {b.shape}")
        spec = spectral_summary(LinearMap(A.T))
        L = spec.op_norm ** 2 - shift
        mu = min(spec.lambda_min - shift, L)
        if mu < -CONVEXITY_SLACK * max(spec.op_norm ** 2, 1.0):
            raise ProblemShapeError(f"quadratic with shift {shift} is not convex (lambda_min(A*A) = {spec.lambda_min})")
        mu = max(mu, 0.0)
        return cls(FunctionKind.QUADRATIC, A.shape[1], A=A, b=b, shift=float(shift),
                   constant=float(constant), profile=SmoothProfile(L=max(L, mu), mu=mu))

    @classmethod
    def scaled_sq_norm(cls, mu: float, c: Any = None, dim: Optional[int] = None,
                       constant: float = 0.0) -> "FunctionHandle":
        """(mu/2) ||x - c||^2"""
        if mu < 0:
            raise ProblemShapeError(f"scaled squared norm needs mu >= 0, got {mu}")
        if c is None:
            if dim is None:
                raise ProblemShapeError("scaled squared norm needs a center or a dimension")
            c = np.zeros(dim)
        c = _frozen(c)
        return cls(FunctionKind.SCALED_SQ_NORM, c.shape[0], c=c, mu=float(mu),
                   constant=float(constant), profile=SmoothProfile(L=float(mu), mu=float(mu)))

    @classmethod
    def l1(cls, lam: float, dim: int) -> "FunctionHandle":
        """lam ||x||_1"""
        if lam < 0:
            raise ProblemShapeError(f"l1 weight must be nonnegative, got {lam}")
        return cls(FunctionKind.L1, dim, lam=float(lam))

    @classmethod
    def elastic(cls, mu: float, lam: float, dim: int, constant: float = 0.0) -> "FunctionHandle":
        """(mu/2) ||x||^2 + lam ||x||_1"""
        if mu < 0 or lam < 0:
            raise ProblemShapeError(f"elastic regularizer needs mu, lam >= 0, got {mu}, {lam}")
        return cls(FunctionKind.ELASTIC_REG, dim, mu=float(mu), lam=float(lam), constant=float(constant))

    @classmethod
    def indicator_point(cls, b: Any, constant: float = 0.0) -> "FunctionHandle":
        """Indicator of the singleton {b}"""
        b = _frozen(b)
        return cls(FunctionKind.INDICATOR_POINT, b.shape[0], b=b, constant=float(constant))

    @classmethod
    def linear(cls, b: Any, constant: float = 0.0) -> "FunctionHandle":
        """<x, b>"""
        b = _frozen(b)
        return cls(FunctionKind.LINEAR, b.shape[0], b=b, constant=float(constant),
                   profile=SmoothProfile(L=0.0, mu=0.0))

    @classmethod
    def zero(cls, dim: int, constant: float = 0.0) -> "FunctionHandle":
        return cls(FunctionKind.ZERO, dim, constant=float(constant), profile=SmoothProfile(L=0.0, mu=0.0))

    def describe(self) -> Dict[str, Any]:
        """Scalar summary for trace metadata"""
        info: Dict[str, Any] = {"kind": self.kind.value, "dim": self.dim}
        if self.kind in (FunctionKind.SCALED_SQ_NORM, FunctionKind.ELASTIC_REG):
            info["mu"] = self.mu
        if self.kind in (FunctionKind.L1, FunctionKind.ELASTIC_REG):
            info["lam"] = self.lam
        if self.kind is FunctionKind.QUADRATIC and self.shift:
            info["shift"] = self.shift
        if self.profile is not None:
            info["L"] = self.profile.L
            info["strong_convexity"] = self.profile.mu
        return info
