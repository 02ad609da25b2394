"""SplitMix64 generator, so problem instances are identical on every platform.

Seed 0 yields 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...
"""
import math
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform on [0, 1) with 53 random bits"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, size: int) -> np.ndarray:
        return np.array([self.next_float() for _ in range(size)])

    def normal(self, size: int) -> np.ndarray:
        """Standard normals by Box-Muller, consuming two draws per pair"""
        out = np.empty(size)
        for i in range(0, size, 2):
            u1 = 1.0 - self.next_float()
            u2 = self.next_float()
            r = math.sqrt(-2.0 * math.log(u1))
            out[i] = r * math.cos(2.0 * math.pi * u2)
            if i + 1 < size:
                out[i + 1] = r * math.sin(2.0 * math.pi * u2)
        return out

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normal(rows * cols).reshape(rows, cols)

    def orthogonal(self, n: int) -> np.ndarray:
        """Random orthogonal matrix from the QR factorization of a Gaussian matrix"""
        q, r = np.linalg.qr(self.normal_matrix(n, n))
        signs = np.where(np.diag(r) < 0, -1.0, 1.0)
        return q * signs
