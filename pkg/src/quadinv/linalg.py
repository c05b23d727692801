"""Dense linear algebra kernels with reproducible floating-point behaviour.

Matrices are plain 2-D float64 numpy arrays. The matrix-matrix product is
a pinned-order kernel: every output element accumulates its dot product
sequentially over k (left to right), so results are bit-identical no matter
how many threads call into it, and traces built on top of it are exactly
reproducible. Matrix-vector products go through numpy's BLAS path (their
accumulation order is not part of any contract here).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import NonFiniteError

Matrix = np.ndarray


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; identical seed gives an identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(a, name: str = "matrix") -> Matrix:
    """Validate and coerce to a C-contiguous float64 2-D array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NonFiniteError(f"{name} contains non-finite entries")
    return m


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.float64)


@njit(cache=True)
def _matmul_kernel(a, b):
    # Accumulation over t is strictly sequential per output element; the
    # inner j loop only vectorizes across distinct output elements.
    m, k = a.shape
    p = b.shape[1]
    out = np.zeros((m, p))
    for i in range(m):
        for t in range(k):
            aval = a[i, t]
            for j in range(p):
                out[i, j] += aval * b[t, j]
    return out


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Pinned-order matrix product.

    out[i, j] = sum_t a[i, t] * b[t, j], accumulated in increasing t.
    Raises on dimension mismatch and on non-finite output.
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-D arrays")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    out = _matmul_kernel(
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    )
    if not np.isfinite(out).all():
        raise NonFiniteError("matmul produced non-finite entries")
    return out


def matvec(a: Matrix, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product via numpy (BLAS); raises on non-finite output."""
    if a.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {v.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ v
    if not np.isfinite(out).all():
        raise NonFiniteError("matvec produced non-finite entries")
    return out


def frobenius_norm(a: Matrix) -> float:
    """sqrt of the sum of squared entries."""
    return float(np.sqrt(np.sum(np.asarray(a, dtype=np.float64) ** 2)))


def spectral_norm(a: Matrix, iters: int = 200, rng: np.random.Generator | None = None) -> float:
    """Largest singular value, estimated by power iteration on A^T A.

    The estimate is monotone non-decreasing in `iters` up to rounding and
    never exceeds the Frobenius norm.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    a = np.asarray(a, dtype=np.float64)
    if rng is None:
        rng = make_rng(0)
    v = rng.standard_normal(a.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    sigma = 0.0
    for _ in range(iters):
        w = a @ v
        u = a.T @ w
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        sigma = float(np.linalg.norm(a @ v))
    return sigma


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> Matrix:
    """i.i.d. standard normal entries (numpy ziggurat transform)."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return rng.standard_normal((rows, cols))


def haar_orthogonal(n: int, rng: np.random.Generator) -> Matrix:
    """Haar-distributed orthogonal matrix.

    QR of a Gaussian matrix with the R diagonal sign absorbed into Q, which
    makes the distribution exactly rotation-invariant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    return np.ascontiguousarray(q * d)
