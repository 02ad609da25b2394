import numpy as np
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union
from loguru import logger

from ..config import get_settings
from ..utils.errors import ConfigError, DimensionMismatchError, ProblemShapeError

# Eigenvalues of KK* at or below op_norm^2 * eps * max(rows, cols) * ZERO_CUTOFF_FACTOR count as zero.
ZERO_CUTOFF_FACTOR = 64


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Dense linear map K: R^cols -> R^rows, read-only after construction"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DimensionMismatchError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "LinearMap":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "LinearMap":
        return cls(np.asarray(rows, dtype=float))


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral quantities consumed by stepsize rules and rate formulas"""
    op_norm: float
    lambda_min: float
    lambda_min_pos: Optional[float]

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def as_vector(v: Any, dim: int, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-d float array of length dim"""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise DimensionMismatchError(f"{name} must have shape ({dim},), got {arr.shape}")
    return arr


def apply(K: LinearMap, x: Any) -> np.ndarray:
    """Return Kx"""
    return K.matrix @ as_vector(x, K.cols, "x")


def apply_adjoint(K: LinearMap, y: Any) -> np.ndarray:
    """Return K*y"""
    return K.matrix.T @ as_vector(y, K.rows, "y")


def _zero_cutoff(op_norm: float, K: LinearMap) -> float:
    return op_norm ** 2 * np.finfo(float).eps * max(K.rows, K.cols) * ZERO_CUTOFF_FACTOR


def operator_norm(K: LinearMap,
                  tol: Optional[float] = None,
                  max_iters: Optional[int] = None,
                  seed: Optional[int] = None) -> float:
    """
    Largest singular value of K by power iteration on the smaller Gram matrix

    Args:
        K: Operator
        tol: Relative accuracy target
        max_iters: Iteration cap
        seed: Seed for the start vector

    Returns:
        float: ||K||
    """
    settings = get_settings()
    tol = settings.SPECTRAL_TOL if tol is None else tol
    max_iters = settings.POWER_ITER_MAX if max_iters is None else max_iters
    seed = settings.POWER_ITER_SEED if seed is None else seed

    A = K.matrix
    if not np.any(A):
        return 0.0
    gram = A.T @ A if K.cols <= K.rows else A @ A.T

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    stop = max(tol * 1e-3, 4 * np.finfo(float).eps)

    rayleigh = 0.0
    for it in range(max_iters):
        w = gram @ v
        current = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            break
        v = w / norm_w
        if it > 0 and abs(current - rayleigh) <= stop * current:
            rayleigh = current
            break
        rayleigh = current
    else:
        logger.warning(f"Power iteration hit {max_iters} iterations on a {K.rows}x{K.cols} operator")

    return float(np.sqrt(max(rayleigh, 0.0)))


def spectral_summary(K: LinearMap, tol: Optional[float] = None) -> SpectralSummary:
    """
    Compute ||K||, lambda_min(KK*) and lambda_min_pos(KK*)

    Args:
        K: Operator
        tol: Relative accuracy, in (0, 1e-3]

    Returns:
        SpectralSummary: The operator norm and the smallest (positive) eigenvalues of KK*
    """
    tol = get_settings().SPECTRAL_TOL if tol is None else tol
    if not 0.0 < tol <= 1e-3:
        raise ProblemShapeError(f"spectral tolerance must lie in (0, 1e-3], got {tol}")

    if not np.any(K.matrix):
        return SpectralSummary(op_norm=0.0, lambda_min=0.0, lambda_min_pos=None)

    op_norm = operator_norm(K, tol)
    op_sq = op_norm ** 2
    eigs = np.linalg.eigvalsh(K.matrix @ K.matrix.T)
    eigs = np.where(eigs <= _zero_cutoff(op_norm, K), 0.0, np.minimum(eigs, op_sq))

    positive = eigs[eigs > 0.0]
    summary = SpectralSummary(
        op_norm=op_norm,
        lambda_min=float(eigs[0]),
        lambda_min_pos=float(positive[0]) if positive.size else None,
    )
    logger.debug(f"Spectral summary for {K.rows}x{K.cols} operator: {summary}")
    return summary


def range_basis(K: LinearMap) -> np.ndarray:
    """Orthonormal basis of ran(K) as columns, using the same zero cutoff as spectral_summary"""
    U, s, _ = np.linalg.svd(K.matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((K.rows, 0))
    keep = s ** 2 > _zero_cutoff(float(s[0]), K)
    return U[:, keep]


def project_range(K: LinearMap, y: Any, basis: Optional[np.ndarray] = None) -> np.ndarray:
    y = as_vector(y, K.rows, "y")
    B = range_basis(K) if basis is None else basis
    return B @ (B.T @ y)


def distance_to_range(K: LinearMap, y: Any, basis: Optional[np.ndarray] = None) -> float:
    y = as_vector(y, K.rows, "y")
    return float(np.linalg.norm(y - project_range(K, y, basis)))


def parse_matrix(text: str) -> LinearMap:
    """Parse the plain-text matrix format: a "rows cols" header, then one line per row"""
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or len(lines[0]) != 2:
        raise ConfigError("matrix file must start with a 'rows cols' header")
    try:
        rows, cols = int(lines[0][0]), int(lines[0][1])
        data = [[float(tok) for tok in line] for line in lines[1:]]
    except ValueError as e:
        raise ConfigError(f"malformed matrix file: {e}") from e
    if rows < 1 or cols < 1 or len(data) != rows or any(len(r) != cols for r in data):
        raise ConfigError(f"matrix body does not match header {rows}x{cols}")
    return LinearMap.from_rows(data)


def load_matrix(path: Union[str, Path]) -> LinearMap:
    return parse_matrix(Path(path).read_text())
