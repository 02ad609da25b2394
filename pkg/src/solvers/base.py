import numpy as np
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from ..funcs.base import FunctionHandle, FunctionKind
from ..linops.operator import LinearMap, SpectralSummary, spectral_summary
from ..utils.errors import DimensionMismatchError, ProblemShapeError


class AlgorithmId(str, Enum):
    """Accelerated methods and their non-accelerated ancestors"""
    APGD = "apgd"
    APGE = "apge"
    ACV1 = "acv1"
    ACV2 = "acv2"
    APDTR1 = "apdtr1"
    APDTR2 = "apdtr2"
    PGD = "pgd"
    FRB = "frb"
    CV1 = "cv1"
    CV2 = "cv2"
    PDTR1 = "pdtr1"
    PDTR2 = "pdtr2"
    CP = "cp"

    @classmethod
    def parse(cls, name: str) -> "AlgorithmId":
        """Accept 'acv1', 'ACV-I', 'apdtr_ii' and similar spellings"""
        key = name.strip().lower().replace("-", "").replace("_", "")
        if key.endswith("ii"):
            key = key[:-2] + "2"
        elif key.endswith("i") and key[:-1] in ("acv", "apdtr", "cv", "pdtr"):
            key = key[:-1] + "1"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown algorithm '{name}'") from None

    @property
    def is_primal_dual(self) -> bool:
        return self not in TWO_FUNCTION_ALGORITHMS

    @property
    def is_accelerated(self) -> bool:
        return self in ACCELERATED_ALGORITHMS

    @property
    def accelerated_counterpart(self) -> "AlgorithmId":
        """The accelerated method whose Lyapunov functional also measures this one"""
        return ACCELERATED_COUNTERPART.get(self, self)

    @property
    def label(self) -> str:
        return DISPLAY_NAMES[self]


TWO_FUNCTION_ALGORITHMS = frozenset({AlgorithmId.APGD, AlgorithmId.APGE, AlgorithmId.PGD, AlgorithmId.FRB})
ACCELERATED_ALGORITHMS = frozenset({
    AlgorithmId.APGD, AlgorithmId.APGE,
    AlgorithmId.ACV1, AlgorithmId.ACV2,
    AlgorithmId.APDTR1, AlgorithmId.APDTR2,
})
# Algorithms that use nabla f at two consecutive points
REFLECTED_GRADIENT_ALGORITHMS = frozenset({
    AlgorithmId.APGE, AlgorithmId.APDTR1, AlgorithmId.APDTR2,
    AlgorithmId.FRB, AlgorithmId.PDTR1, AlgorithmId.PDTR2,
})
ACCELERATED_COUNTERPART = {
    AlgorithmId.PGD: AlgorithmId.APGD,
    AlgorithmId.FRB: AlgorithmId.APGE,
    AlgorithmId.CV1: AlgorithmId.ACV1,
    AlgorithmId.CV2: AlgorithmId.ACV2,
    AlgorithmId.PDTR1: AlgorithmId.APDTR1,
    AlgorithmId.PDTR2: AlgorithmId.APDTR2,
    AlgorithmId.CP: AlgorithmId.ACV1,
}
DISPLAY_NAMES = {
    AlgorithmId.APGD: "APGD",
    AlgorithmId.APGE: "APGE",
    AlgorithmId.ACV1: "ACV-I",
    AlgorithmId.ACV2: "ACV-II",
    AlgorithmId.APDTR1: "APDTR-I",
    AlgorithmId.APDTR2: "APDTR-II",
    AlgorithmId.PGD: "PGD",
    AlgorithmId.FRB: "FRB",
    AlgorithmId.CV1: "CV-I",
    AlgorithmId.CV2: "CV-II",
    AlgorithmId.PDTR1: "PDTR-I",
    AlgorithmId.PDTR2: "PDTR-II",
    AlgorithmId.CP: "CP",
}


@dataclass(frozen=True, eq=False)
class CompositeProblem:
    """min f(x) + g(x) + h(Kx)

    h and K are either both present or both absent. The spectral summary of K is
    computed on construction when not supplied.
    """
    f: FunctionHandle
    g: FunctionHandle
    h: Optional[FunctionHandle] = None
    K: Optional[LinearMap] = None
    spectral: Optional[SpectralSummary] = None

    def __post_init__(self):
        if not self.f.is_smooth:
            raise ProblemShapeError(f"f must be smooth, got {self.f.kind.value}")
        if self.f.dim != self.g.dim:
            raise DimensionMismatchError(f"f and g dimensions differ: {self.f.dim} vs {self.g.dim}")
        if (self.h is None) != (self.K is None):
            raise ProblemShapeError("h and K must be given together")
        if self.K is not None:
            if self.K.cols != self.f.dim:
                raise DimensionMismatchError(f"K has {self.K.cols} columns but x lives in R^{self.f.dim}")
            if self.K.rows != self.h.dim:
                raise DimensionMismatchError(f"K has {self.K.rows} rows but h lives in R^{self.h.dim}")
            if self.spectral is None:
                object.__setattr__(self, "spectral", spectral_summary(self.K))

    @property
    def d_x(self) -> int:
        return self.f.dim

    @property
    def d_y(self) -> int:
        return self.K.rows if self.K is not None else 0

    @property
    def is_primal_dual(self) -> bool:
        return self.h is not None

    @property
    def is_linearly_constrained(self) -> bool:
        return self.h is not None and self.h.kind is FunctionKind.INDICATOR_POINT

    @property
    def L_f(self) -> float:
        return self.f.profile.L

    @property
    def mu_f(self) -> float:
        return self.f.profile.mu

    @property
    def mu_g(self) -> float:
        return self.g.strong_convexity

    @property
    def L_g(self) -> Optional[float]:
        return self.g.smoothness

    @property
    def mu_hstar(self) -> float:
        """Strong convexity of h*, known exactly when h is a scaled squared norm"""
        if self.h is not None and self.h.kind is FunctionKind.SCALED_SQ_NORM and self.h.mu > 0:
            return 1.0 / self.h.mu
        return 0.0

    @property
    def K_norm(self) -> float:
        return self.spectral.op_norm if self.spectral is not None else 0.0

    def constants(self) -> Dict[str, Any]:
        """Exact problem constants for metadata"""
        out: Dict[str, Any] = {
            "d_x": self.d_x,
            "d_y": self.d_y,
            "L_f": self.L_f,
            "mu_f": self.mu_f,
            "mu_g": self.mu_g,
            "L_g": self.L_g,
        }
        if self.is_primal_dual:
            out["mu_hstar"] = self.mu_hstar
            out.update(self.spectral.as_dict())
        return out


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterates (x, y, z) after k steps

    ``grad_z`` caches nabla f(z^k); ``grad_prev`` caches nabla f(x^{k-1}) for the
    reflected-gradient baselines.
    """
    x: np.ndarray
    y: Optional[np.ndarray]
    z: np.ndarray
    k: int = 0
    grad_z: Optional[np.ndarray] = field(default=None, repr=False)
    grad_prev: Optional[np.ndarray] = field(default=None, repr=False)

    def is_finite(self) -> bool:
        ok = bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.z)))
        if self.y is not None:
            ok = ok and bool(np.all(np.isfinite(self.y)))
        return ok


@dataclass(frozen=True)
class StopRule:
    """Stop after max_iters, or earlier once the KKT residual or relative Lyapunov value drops below its threshold"""
    max_iters: int
    kkt_tol: Optional[float] = None
    value_tol: Optional[float] = None

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")


def check_compatible(problem: CompositeProblem, alg: AlgorithmId):
    if alg.is_primal_dual and not problem.is_primal_dual:
        raise ProblemShapeError(f"{alg.label} needs h and K")
    if not alg.is_primal_dual and problem.is_primal_dual:
        raise ProblemShapeError(f"{alg.label} solves f + g only; this problem has h(Kx)")
