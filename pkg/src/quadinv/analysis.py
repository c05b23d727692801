"""Convergence-order estimation and direct verifiers for the error recursions.

The empirical order of a positive error sequence is the least-squares slope
of log e_{t+1} against log e_t over consecutive pairs inside a window; the
window excludes the pre-asymptotic head and the double-precision floor, both
of which would bias the slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import Matrix, frobenius_norm, identity, matmul

DEFAULT_WINDOW = (1e-2, 1e-13)


@dataclass(frozen=True)
class OrderEstimate:
    """Fitted exponent p and log-constant of e_{t+1} ~ C * e_t^p."""

    order: float
    intercept: float
    points_used: int
    fit_residual: float
    window: tuple[float, float]

    @property
    def sufficient(self) -> bool:
        return self.points_used >= 3


@dataclass(frozen=True)
class SpectrumInfo:
    """Extreme singular values of the data matrix, as built by the generator."""

    sigma_max: float
    sigma_min: float
    n: int

    def __post_init__(self):
        if not (self.sigma_max >= self.sigma_min > 0.0):
            raise ValueError("requires sigma_max >= sigma_min > 0")


def estimate_order(errs: Sequence[float],
                   window: tuple[float, float] = DEFAULT_WINDOW) -> OrderEstimate:
    """Fit the convergence order of an error sequence.

    Consecutive pairs with both values inside [window_lo, window_hi]
    contribute one regression point each; fewer than 3 such pairs marks the
    estimate insufficient (order reported as NaN, not an error).
    """
    hi, lo = window
    if not (hi > lo > 0.0):
        raise ValueError("window must satisfy hi > lo > 0")
    errs = [float(e) for e in errs]
    if any(e <= 0.0 for e in errs):
        raise ValueError("errs must be strictly positive")
    xs, ys = [], []
    for e0, e1 in zip(errs, errs[1:]):
        if lo <= e0 <= hi and lo <= e1 <= hi:
            xs.append(math.log(e0))
            ys.append(math.log(e1))
    npts = len(xs)
    if npts < 3:
        return OrderEstimate(math.nan, math.nan, npts, math.nan, window)
    x = np.array(xs)
    y = np.array(ys)
    dx = x - x.mean()
    sxx = float(np.sum(dx * dx))
    if sxx == 0.0:
        return OrderEstimate(math.nan, math.nan, npts, math.nan, window)
    slope = float(np.sum(dx * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid * resid)))
    return OrderEstimate(slope, intercept, npts, rms, window)


def sweep_linear_coefficient(x: Matrix, w_star: Matrix,
                             ordering: Sequence[int]) -> Matrix:
    """Coefficient of the initial error after one full stochastic epoch.

    Left-to-right product, over the given column ordering, of the per-sample
    factors I - X_i X_i^T W*^T W*. When every column appears exactly once the
    cross terms cancel and the product collapses to I - X W* = 0, which is
    what makes the per-epoch error map purely higher order.

    `ordering` must be a permutation of range(n) (0-based columns).
    """
    n = x.shape[0]
    if x.shape != (n, n) or w_star.shape != (n, n):
        raise ValueError("X and W* must be square with matching shape")
    if sorted(int(i) for i in ordering) != list(range(n)):
        raise ValueError("ordering must be a permutation of range(n)")
    defect = frobenius_norm(matmul(w_star, x) - identity(n))
    if defect > 1e-8 * n:
        raise ValueError(f"W* is not an inverse of X within tolerance: defect {defect:.3e}")
    m = matmul(w_star.T, w_star)
    prod = identity(n)
    for i in ordering:
        xi = x[:, int(i)][:, None]
        factor = identity(n) - matmul(xi, matmul(xi.T, m))
        prod = matmul(prod, factor)
    return prod


def polyrate_linear_coefficient(w_star: Matrix, x: Matrix, coeffs) -> Matrix:
    """Linear-term coefficient I - X X^T sum_i coeffs[i] (W*^T W*)^i.

    The error recursion of the matrix-polynomial step rule keeps a linear
    term with exactly this coefficient; callers assert it is nonzero when
    W* is rank deficient, which caps the convergence order at one.
    """
    coeffs = tuple(float(c) for c in coeffs)
    if not coeffs:
        raise ValueError("coeffs must be non-empty")
    d = x.shape[0]
    if w_star.shape[1] != d:
        raise ValueError(f"W* columns ({w_star.shape[1]}) must match X rows ({d})")
    m = matmul(w_star.T, w_star)
    gamma = coeffs[0] * identity(d)
    power = identity(d)
    for c in coeffs[1:]:
        power = matmul(power, m)
        gamma = gamma + c * power
    return identity(d) - matmul(matmul(x, x.T), gamma)


def quadratic_bound_holds(err: float, err_next: float, spectrum: SpectrumInfo,
                          slack: float = 1e-12) -> bool:
    """Check one step of the local error bound

        err'^2 <= s1^4 err^6 + n s1^4 s_n^-2 err^4 (+ slack),

    taking err as ||U||_F. The bound is local: it is only meaningful near the
    solution, and its constants are tight enough that small cases can fail
    it; callers treat a False as a flag, not a fatal condition.
    """
    if err < 0.0 or err_next < 0.0:
        raise ValueError("errors must be non-negative")
    s1 = spectrum.sigma_max
    bound = s1 ** 4 * err ** 6 + spectrum.n * s1 ** 4 * spectrum.sigma_min ** -2 * err ** 4
    return err_next ** 2 <= bound + slack
