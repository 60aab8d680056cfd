"""Structured direct solvers: Thomas elimination and banded LU.

Band storage follows the LAPACK ``ab`` layout: ``data[bw + i - j, j]``
holds ``M[i, j]`` for ``|i - j| <= bw``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

SINGULAR_RTOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when elimination meets a (numerically) zero pivot."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BandedMatrix:
    """Square matrix with ``bandwidth`` sub- and super-diagonals."""

    def __init__(self, data, bandwidth: int):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] != 2 * bandwidth + 1:
            raise ValueError(
                f"band storage must have {2 * bandwidth + 1} rows, got shape {data.shape}"
            )
        self.data = data
        self.bandwidth = bandwidth

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, n: int, bandwidth: int) -> BandedMatrix:
        return cls(np.zeros((2 * bandwidth + 1, n)), bandwidth)

    @classmethod
    def from_dense(cls, dense, bandwidth: int) -> BandedMatrix:
        dense = np.asarray(dense, dtype=float)
        n = dense.shape[0]
        if dense.shape != (n, n):
            raise ValueError("matrix must be square")
        out = cls.zeros(n, bandwidth)
        for k in range(-bandwidth, bandwidth + 1):
            # k = j - i; row bw - k of the storage
            diag = np.diagonal(dense, offset=k)
            if k >= 0:
                out.data[bandwidth - k, k:] = diag
            else:
                out.data[bandwidth - k, : n + k] = diag
        outside = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) > bandwidth
        if np.any(dense[outside] != 0.0):
            raise ValueError(f"matrix has entries outside bandwidth {bandwidth}")
        return out

    def to_dense(self) -> np.ndarray:
        n, bw = self.n, self.bandwidth
        dense = np.zeros((n, n))
        for k in range(-bw, bw + 1):
            if k >= 0:
                diag = self.data[bw - k, k:]
            else:
                diag = self.data[bw - k, : n + k]
            idx = np.arange(diag.size)
            if k >= 0:
                dense[idx, idx + k] = diag
            else:
                dense[idx - k, idx] = diag
        return dense

    def entry(self, i: int, j: int) -> float:
        if abs(i - j) > self.bandwidth:
            return 0.0
        return float(self.data[self.bandwidth + i - j, j])

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"vector length {x.shape} does not match dimension {self.n}")
        n, bw = self.n, self.bandwidth
        y = np.zeros(n)
        for k in range(-bw, bw + 1):
            # y[i] += M[i, i+k] * x[i+k]; M[i, i+k] lives at data[bw - k, i + k]
            if k >= 0:
                y[: n - k] += self.data[bw - k, k:] * x[k:]
            else:
                y[-k:] += self.data[bw - k, : n + k] * x[: n + k]
        return y

    def combine(self, other: BandedMatrix, scale: float) -> BandedMatrix:
        """Return ``self + scale * other``."""
        if other.n != self.n or other.bandwidth != self.bandwidth:
            raise ValueError("banded matrices are not conformable")
        return BandedMatrix(self.data + scale * other.data, self.bandwidth)

    def norm_inf(self) -> float:
        row_sums = BandedMatrix(np.abs(self.data), self.bandwidth).matvec(np.ones(self.n))
        return float(row_sums.max()) if self.n else 0.0

    def copy(self) -> BandedMatrix:
        return BandedMatrix(self.data.copy(), self.bandwidth)

    def __repr__(self):
        return f"BandedMatrix(n={self.n}, bandwidth={self.bandwidth})"


@dataclass(frozen=True)
class TridiagonalSystem:
    """``sub[i]`` multiplies ``x[i-1]`` and ``sup[i]`` multiplies ``x[i+1]``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if n < 1 or len(self.sub) != n or len(self.sup) != n:
            raise ValueError("tridiagonal arrays must share a positive length")

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = np.asarray(self.diag, dtype=float) * x
        y[1:] += np.asarray(self.sub[1:]) * x[:-1]
        y[:-1] += np.asarray(self.sup[:-1]) * x[1:]
        return y


def thomas_solve(system: TridiagonalSystem, rhs) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution."""
    a = np.asarray(system.sub, dtype=float)
    b = np.asarray(system.diag, dtype=float)
    c = np.asarray(system.sup, dtype=float)
    d = np.asarray(rhs, dtype=float)
    n = b.size
    if d.shape != (n,):
        raise ValueError(f"rhs length {d.size} does not match system size {n}")
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.max(np.abs(c)))
    tol = SINGULAR_RTOL * scale
    cp = np.empty(n)
    dp = np.empty(n)
    piv = b[0]
    if abs(piv) <= tol:
        raise SingularMatrixError("zero pivot at row 0", index=0)
    cp[0] = c[0] / piv
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i] * cp[i - 1]
        if abs(piv) <= tol:
            raise SingularMatrixError(f"zero pivot at row {i}", index=i)
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@dataclass(frozen=True)
class BandedLU:
    """Partial-pivoting LU factors in LAPACK ``gbtrf`` layout."""

    factors: np.ndarray
    pivots: np.ndarray
    n: int
    bandwidth: int


def banded_lu_factor(m: BandedMatrix) -> BandedLU:
    bw = m.bandwidth
    n = m.n
    if n < 1 or bw > max(n - 1, 0):
        raise ValueError(f"bandwidth {bw} invalid for dimension {n}")
    # bw extra rows on top receive the fill-in from row interchanges
    ab = np.zeros((3 * bw + 1, n), order="F")
    ab[bw:, :] = m.data
    lu, piv, info = lapack.dgbtrf(ab, bw, bw)
    if info < 0:
        raise ValueError(f"dgbtrf rejected argument {-info}")
    tol = SINGULAR_RTOL * m.norm_inf()
    udiag = lu[2 * bw, :]
    bad = np.flatnonzero(np.abs(udiag) <= tol)
    if info > 0 or bad.size:
        idx = info - 1 if info > 0 else int(bad[0])
        raise SingularMatrixError(f"matrix is numerically singular at pivot {idx}", index=idx)
    return BandedLU(factors=lu, pivots=piv, n=n, bandwidth=bw)


def banded_lu_solve(factorization: BandedLU, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (factorization.n,):
        raise ValueError(f"rhs length {rhs.shape} does not match dimension {factorization.n}")
    bw = factorization.bandwidth
    x, info = lapack.dgbtrs(factorization.factors, bw, bw, rhs, factorization.pivots)
    if info != 0:
        raise ValueError(f"dgbtrs rejected argument {-info}")
    return x
