"""Complex matrices, QR factorization, and seeded complex Gaussian sampling.

Matrices are plain 2-D complex128 numpy arrays (row-major); shape carries
the (rows, cols) bookkeeping.  All outputs are freshly allocated and never
aliased, so they can be treated as immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["RngHandle", "QRFactors", "qr_decompose", "sample_complex_gaussian"]

_ALGORITHMS = ("philox", "pcg64")


def _mix64(seed: int, index: int) -> int:
    """SplitMix64-style mix of (seed, index) into a new 64-bit seed."""
    z = (seed ^ (index * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class RngHandle:
    """Single-owner handle over a counter-based random stream.

    Identical (seed, algorithm) always reproduces the identical stream of
    draws.  A handle must not be shared between workers; parallel use splits
    independent substreams with `spawn`, keyed deterministically on
    (seed, index).
    """

    def __init__(self, seed: int, algorithm: str = "philox"):
        if algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown rng algorithm {algorithm!r}; use one of {_ALGORITHMS}")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.algorithm = algorithm
        self._gen: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            if self.algorithm == "philox":
                bitgen = np.random.Philox(self.seed)
            else:
                bitgen = np.random.PCG64(self.seed)
            self._gen = np.random.Generator(bitgen)
        return self._gen

    def spawn(self, index: int) -> "RngHandle":
        """Independent substream for worker/batch `index`."""
        return RngHandle(_mix64(self.seed, int(index)), self.algorithm)

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, algorithm={self.algorithm!r})"


@dataclass(frozen=True)
class QRFactors:
    """q (n x n unitary) and r (n x m upper triangular, real non-negative
    diagonal) with q @ r reproducing the factored matrix."""

    q: np.ndarray
    r: np.ndarray


def qr_decompose(a: np.ndarray) -> QRFactors:
    """Householder QR of an n x m complex matrix with n >= m.

    The diagonal of r is normalized to be real and non-negative (the
    factor pair is then unique for full-column-rank input), which makes
    golden tests deterministic; |r_ii|^2 itself is convention-free.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    n, m = a.shape
    if n < m:
        raise ValueError(f"qr_decompose requires rows >= cols, got {n} x {m}")
    q, r = np.linalg.qr(a, mode="complete")
    q = np.ascontiguousarray(q)
    r = np.ascontiguousarray(r)
    for j in range(m):
        d = r[j, j]
        mag = abs(d)
        if mag > 0.0:
            phase = d / mag
            r[j, j:] *= np.conj(phase)
            q[:, j] *= phase
            r[j, j] = mag  # exact real diagonal
    return QRFactors(q=q, r=r)


def sample_complex_gaussian(
    rng: RngHandle,
    rows: int,
    cols: int,
    column_variances: Sequence[float],
) -> np.ndarray:
    """Circularly-symmetric complex Gaussian matrix with independent entries.

    Column i entries are CN(0, column_variances[i]); the variance splits
    equally between real and imaginary parts.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got {rows} x {cols}")
    var = np.asarray(column_variances, dtype=float)
    if var.shape != (cols,):
        raise ValueError(f"column_variances must have length {cols}, got shape {var.shape}")
    if np.any(var <= 0.0):
        raise ValueError("column variances must be strictly positive")
    gen = rng.generator
    scale = np.sqrt(var / 2.0)
    z = gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))
    return z * scale[np.newaxis, :]
