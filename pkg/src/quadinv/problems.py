"""Random test-problem generators and initialization schemes.

Invertible matrices are built from their SVD: singular values are absolute
values of standard normal draws (optionally redrawn as a block until the
condition number fits under a cap) and the orthogonal factors are Haar
distributed. Generators also return the ground-truth solution so that error
norms are measured against a trusted reference instead of a computed inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GenerationError
from .linalg import Matrix, frobenius_norm, gaussian_matrix, haar_orthogonal, identity, make_rng, matmul


@dataclass(frozen=True)
class RandomMatrixSpec:
    """What to generate: dimension, seed, family, and conditioning knobs."""

    n: int
    seed: int
    kind: str = "general-invertible"  # | "spd" | "rank-deficient-target"
    rank: int | None = None
    condition_cap: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind not in ("general-invertible", "spd", "rank-deficient-target"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "rank-deficient-target":
            if self.rank is None or not (1 <= self.rank < self.n):
                raise ValueError("rank-deficient-target requires 1 <= rank < n")
        elif self.rank is not None:
            raise ValueError("rank is only valid for rank-deficient-target")
        if self.condition_cap is not None and self.condition_cap <= 1.0:
            raise ValueError("condition_cap must be > 1")


# Initialization schemes


@dataclass(frozen=True)
class ScaledTrueInverse:
    """c * W_star; needs the generator's ground truth (test/demo only)."""

    c: float


@dataclass(frozen=True)
class ZeroInit:
    pass


@dataclass(frozen=True)
class ScaledIdentity:
    c: float


@dataclass(frozen=True)
class CommutingPolynomial:
    """sum_i coeffs[i] * X^i; commutes with X by construction (root problem)."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not self.coeffs or not all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be non-empty and finite")


InitScheme = ScaledTrueInverse | ZeroInit | ScaledIdentity | CommutingPolynomial


def _draw_sigma(n: int, rng: np.random.Generator, condition_cap: float | None,
                max_redraws: int) -> np.ndarray:
    """|N(0,1)| draws, sorted descending, block-redrawn until under the cap."""
    for _ in range(max_redraws):
        sigma = np.sort(np.abs(rng.standard_normal(n)))[::-1]
        if sigma[-1] <= 0.0:
            continue
        if condition_cap is None or sigma[0] / sigma[-1] <= condition_cap:
            return sigma
    raise GenerationError(
        f"condition_cap {condition_cap} not met within {max_redraws} redraws"
    )


def gen_invertible(spec: RandomMatrixSpec, rng: np.random.Generator | None = None,
                   max_redraws: int = 1000) -> tuple[Matrix, Matrix, np.ndarray]:
    """Random invertible X with its exact inverse.

    Returns (X, W_star, sigma): X = U diag(sigma) V^T with Haar U, V and
    sigma descending; W_star = V diag(1/sigma) U^T.
    """
    if spec.kind != "general-invertible":
        raise ValueError(f"spec.kind must be general-invertible, got {spec.kind!r}")
    if rng is None:
        rng = make_rng(spec.seed)
    sigma = _draw_sigma(spec.n, rng, spec.condition_cap, max_redraws)
    u = haar_orthogonal(spec.n, rng)
    v = haar_orthogonal(spec.n, rng)
    x = matmul(u, sigma[:, None] * v.T)
    w_star = matmul(v, (1.0 / sigma)[:, None] * u.T)
    return x, w_star, sigma


def gen_spd(n: int, rng: np.random.Generator,
            condition_cap: float | None = None,
            max_redraws: int = 1000) -> tuple[Matrix, Callable[[int], Matrix]]:
    """Random SPD matrix and its exact inverse d-th root.

    Returns (X, droot) where droot(d) = Q diag(lambda^(-1/d)) Q^T shares X's
    eigenbasis. X is exactly symmetric.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = _draw_sigma(n, rng, condition_cap, max_redraws)
    q = haar_orthogonal(n, rng)
    x = matmul(q, lam[:, None] * q.T)
    x = (x + x.T) / 2.0  # exact symmetry

    def droot(d: int) -> Matrix:
        if d < 1:
            raise ValueError("d must be >= 1")
        m = matmul(q, (lam ** (-1.0 / d))[:, None] * q.T)
        return (m + m.T) / 2.0

    return x, droot


def gen_rank_deficient(spec: RandomMatrixSpec, rng: np.random.Generator | None = None
                       ) -> tuple[Matrix, Matrix, Matrix]:
    """Linear system Y = W_star X whose solution has rank < n.

    Returns (X, Y, W_star) with X a generic (Gaussian) n x n matrix and
    W_star = A B a product of n x rank and rank x n Gaussian factors.
    """
    if spec.kind != "rank-deficient-target":
        raise ValueError(f"spec.kind must be rank-deficient-target, got {spec.kind!r}")
    if rng is None:
        rng = make_rng(spec.seed)
    n, r = spec.n, spec.rank
    a = gaussian_matrix(n, r, rng)
    b = gaussian_matrix(r, n, rng)
    w_star = matmul(a, b)
    x = gaussian_matrix(n, n, rng)
    y = matmul(w_star, x)
    return x, y, w_star


def make_init(scheme: InitScheme, n: int, x: Matrix | None = None,
              w_star: Matrix | None = None) -> Matrix:
    """Build the initial iterate W^(0) for a given scheme."""
    if isinstance(scheme, ZeroInit):
        return np.zeros((n, n))
    if isinstance(scheme, ScaledIdentity):
        return scheme.c * identity(n)
    if isinstance(scheme, ScaledTrueInverse):
        if w_star is None:
            raise ValueError("scaled-true-inverse init requires the ground-truth solution")
        return scheme.c * w_star
    if isinstance(scheme, CommutingPolynomial):
        if x is None:
            raise ValueError("commuting-polynomial init requires X")
        out = scheme.coeffs[0] * identity(n)
        power = identity(n)
        for c in scheme.coeffs[1:]:
            power = matmul(power, x)
            out = out + c * power
        return out
    raise ValueError(f"unknown init scheme {scheme!r}")


def reduce_target(x: Matrix, y: Matrix) -> Matrix:
    """Fold an orthogonal target Y into the data matrix.

    Returns X Y^T. If W solves W (X Y^T) = I then W X = W X Y^T Y = Y, so an
    identity-target solve on the reduced matrix yields W with W X = Y; no
    post-processing of W is needed.
    """
    n = y.shape[0]
    if y.shape[0] != y.shape[1]:
        raise ValueError("Y must be square")
    ortho_defect = frobenius_norm(matmul(y.T, y) - identity(n))
    if ortho_defect > 1e-8 * n:
        raise ValueError(f"Y is not orthogonal within tolerance: defect {ortho_defect:.3e}")
    return matmul(x, y.T)
