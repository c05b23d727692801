"""Iteration rules and solve drivers.

The central update is gradient descent on 0.5*||I - WX||_F^2 with the
matrix-valued step size W^T W multiplied on the right of the gradient:

    W <- W + (I - WX) X^T W^T W

evaluated strictly left to right. Around it live the stochastic per-column
variant, the inverse d-th-root iteration for SPD matrices, a matrix
polynomial step-size family, and the baselines (Newton, fixed-step gradient
descent, randomized Kaczmarz), plus a hybrid driver that warm-starts with a
linear-rate method and switches to the adaptive rule inside its basin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonFiniteError
from .linalg import Matrix, frobenius_norm, identity, make_rng, matmul, matvec
from .trace import StopReason, Trace, TraceRecord


# Step-size rules


@dataclass(frozen=True)
class FixedStep:
    eta: float

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta <= 0.0:
            raise ValueError("eta must be finite and > 0")


@dataclass(frozen=True)
class AdaptiveRight:
    """Right-multiplicative step size W^T W."""


@dataclass(frozen=True)
class AdaptiveRoot:
    """Step size for the inverse d-th-root iteration."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")


@dataclass(frozen=True)
class MatrixPolynomial:
    """Step size sum_i coeffs[i] * (W^T W)^i."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not self.coeffs or not any(c != 0.0 for c in self.coeffs):
            raise ValueError("coeffs must contain at least one nonzero value")


StepRule = FixedStep | AdaptiveRight | AdaptiveRoot | MatrixPolynomial


class EpochSchedule(enum.Enum):
    CYCLIC = "cyclic"  # fresh uniform permutation, every column once per epoch
    IID = "iid"        # n independent uniform draws per epoch, duplicates allowed


@dataclass(frozen=True)
class SolverConfig:
    step_rule: StepRule = field(default_factory=AdaptiveRight)
    tol_loss: float = 1e-24
    max_iters: int = 1000
    max_epochs: int = 100
    divergence_factor: float = 1e6
    schedule: EpochSchedule | None = None
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not np.isfinite(self.tol_loss) or self.tol_loss <= 0.0:
            raise ValueError("tol_loss must be finite and > 0")
        if self.max_iters < 1 or self.max_epochs < 1:
            raise ValueError("iteration/epoch budgets must be >= 1")
        if self.divergence_factor <= 1.0:
            raise ValueError("divergence_factor must be > 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


class SolveResult(NamedTuple):
    w: Matrix
    trace: Trace
    stop: StopReason


def half_sumsq(a: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):  # inf loss = divergence signal
        return 0.5 * float(np.sum(a * a))


def inversion_loss(w: Matrix, x: Matrix) -> float:
    """0.5 * ||I - WX||_F^2."""
    return half_sumsq(identity(x.shape[0]) - matmul(w, x))


def root_loss(w: Matrix, x: Matrix, d: int) -> float:
    """0.5 * ||I - W^d X||_F^2."""
    return half_sumsq(identity(x.shape[0]) - matmul(_mat_power(w, d), x))


def linear_loss(w: Matrix, x: Matrix, y: Matrix) -> float:
    """0.5 * ||Y - WX||_F^2."""
    return half_sumsq(y - matmul(w, x))


# Step operations


def _adaptive_from_residual(w: Matrix, x: Matrix, r: Matrix) -> Matrix:
    return w + matmul(matmul(matmul(r, x.T), w.T), w)


def adaptive_gd_step(w: Matrix, x: Matrix) -> Matrix:
    """W + (I - WX) X^T W^T W, evaluated left to right."""
    _require_square_pair(w, x)
    r = identity(x.shape[0]) - matmul(w, x)
    return _adaptive_from_residual(w, x, r)


def _adaptive_sgd_update(w: Matrix, x_col: np.ndarray, e_col: np.ndarray
                         ) -> tuple[np.ndarray, np.ndarray]:
    # Returns (residual vector, v) with v = W^T (W x); the update is the
    # rank-one matrix residual v^T, so the cost stays O(n^2).
    u = matvec(w, x_col)
    r = e_col - u
    v = matvec(w.T, u)
    return r, v


def adaptive_sgd_step(w: Matrix, x_col: Matrix, e_col: Matrix) -> Matrix:
    """Single-column update W + (e - W x) x^T W^T W using only mat-vec products."""
    n = w.shape[0]
    if w.shape != (n, n):
        raise ValueError("W must be square")
    if x_col.shape != (n, 1) or e_col.shape != (n, 1):
        raise ValueError(f"x_col and e_col must be {n}x1 columns")
    r, v = _adaptive_sgd_update(w, x_col[:, 0], e_col[:, 0])
    out = w + np.multiply.outer(r, v)
    if not np.isfinite(out).all():
        raise NonFiniteError("adaptive_sgd_step produced non-finite entries")
    return out


class CommutatorDriftError(ValueError):
    """W no longer commutes with X within tolerance."""


def _mat_power(w: Matrix, d: int) -> Matrix:
    out = w
    for _ in range(d - 1):
        out = matmul(out, w)
    return out


def root_gd_step(w: Matrix, x: Matrix, d: int, comm_tol: float = 1e-6) -> Matrix:
    """W + (1/d) W^(d+1) (I - W^d X) X for the inverse d-th root of SPD X.

    Requires W to commute with X: the iteration only stays in a common
    eigenbasis (and the step size only collapses to this form) when it does.
    """
    _require_square_pair(w, x)
    if d < 1:
        raise ValueError("d must be >= 1")
    drift = frobenius_norm(matmul(w, x) - matmul(x, w))
    bound = comm_tol * frobenius_norm(w) * frobenius_norm(x)
    if drift > bound:
        raise CommutatorDriftError(
            f"commutator norm {drift:.3e} exceeds {bound:.3e}; "
            "initialize with a matrix polynomial in X"
        )
    wd = _mat_power(w, d)
    r = identity(x.shape[0]) - matmul(wd, x)
    t = matmul(matmul(matmul(wd, w), r), x)
    out = w + (1.0 / d) * t
    if not np.isfinite(out).all():
        raise NonFiniteError("root_gd_step produced non-finite entries")
    return out


def _polyrate_from_residual(w: Matrix, r: Matrix, x: Matrix,
                            coeffs: tuple[float, ...]) -> Matrix:
    # Horner form from the highest degree; each power of W^T W is applied as
    # two successive right multiplications, so coeffs == (0, 1) reproduces the
    # plain adaptive step bit for bit.
    t1 = matmul(r, x.T)
    acc = coeffs[-1] * t1
    for c in reversed(coeffs[:-1]):
        acc = matmul(matmul(acc, w.T), w)
        if c != 0.0:
            acc = acc + c * t1
    return w + acc


def polyrate_gd_step(w: Matrix, x: Matrix, y: Matrix, coeffs) -> Matrix:
    """W + (Y - WX) X^T sum_i coeffs[i] (W^T W)^i, with (W^T W)^0 = I."""
    coeffs = tuple(float(c) for c in coeffs)
    if not coeffs:
        raise ValueError("coeffs must be non-empty")
    k, d = w.shape
    if x.shape[0] != d or y.shape != (k, x.shape[1]):
        raise ValueError(
            f"inconsistent shapes: W {w.shape}, X {x.shape}, Y {y.shape}"
        )
    r = y - matmul(w, x)
    out = _polyrate_from_residual(w, r, x, coeffs)
    if not np.isfinite(out).all():
        raise NonFiniteError("polyrate_gd_step produced non-finite entries")
    return out


def newton_step(w: Matrix, x: Matrix) -> Matrix:
    """Classical inversion iteration 2W - W X W."""
    _require_square_pair(w, x)
    out = 2.0 * w - matmul(matmul(w, x), w)
    if not np.isfinite(out).all():
        raise NonFiniteError("newton_step produced non-finite entries")
    return out


def _fixed_from_residual(w: Matrix, x: Matrix, r: Matrix, eta: float) -> Matrix:
    return w + eta * matmul(r, x.T)


def fixed_gd_step(w: Matrix, x: Matrix, eta: float) -> Matrix:
    """Plain gradient step W + eta (I - WX) X^T."""
    _require_square_pair(w, x)
    if not np.isfinite(eta) or eta <= 0.0:
        raise ValueError("eta must be finite and > 0")
    r = identity(x.shape[0]) - matmul(w, x)
    return _fixed_from_residual(w, x, r, eta)


def kaczmarz_sweep(w: Matrix, x: Matrix, rng: np.random.Generator) -> Matrix:
    """One randomized Kaczmarz sweep per row of W toward X^{-1}.

    Row j approximates the solution of X^T w = e_j; each sweep applies n
    projections onto equations drawn with probability proportional to the
    squared column norms of X.
    """
    _require_square_pair(w, x)
    n = x.shape[0]
    col_sq = np.sum(x * x, axis=0)
    if np.any(col_sq == 0.0):
        raise ValueError("X has a zero column; Kaczmarz projections are undefined")
    p = col_sq / np.sum(col_sq)
    out = w.copy()
    for j in range(n):
        idx = rng.choice(n, size=n, p=p)
        row = out[j]
        for i in idx:
            rhs = 1.0 if i == j else 0.0
            row += ((rhs - float(x[:, i] @ row)) / col_sq[i]) * x[:, i]
    if not np.isfinite(out).all():
        raise NonFiniteError("kaczmarz_sweep produced non-finite entries")
    return out


def _require_square_pair(w: Matrix, x: Matrix) -> None:
    if w.ndim != 2 or x.ndim != 2:
        raise ValueError("expected 2-D arrays")
    n = x.shape[0]
    if x.shape != (n, n) or w.shape != (n, n):
        raise ValueError(f"W and X must both be {n}x{n}, got {w.shape} and {x.shape}")


# Solve drivers


def _drive(
    w: Matrix,
    *,
    loss_and_aux: Callable,
    step: Callable,
    tol_loss: float,
    max_iters: int,
    divergence_factor: float,
    record_every: int,
    err_fn: Callable | None,
    trace: Trace,
    clock: Callable[[], int] | None,
    phase: str | None = None,
    start_iter: int = 0,
    record_initial: bool = True,
    success: Callable[[float], bool] | None = None,
    baseline_loss: float | None = None,
) -> tuple[Matrix, StopReason, float]:
    """Shared full-matrix iteration loop; returns (W, stop reason, last loss)."""
    if success is None:
        success = lambda L: L <= tol_loss

    def record(it: int, loss: float) -> None:
        trace.append(
            TraceRecord(
                iter=it,
                loss=loss,
                phase=phase,
                err_fro=err_fn(w) if err_fn is not None else None,
                wallclock_ns=clock() if clock is not None else 0,
            )
        )

    loss, aux = loss_and_aux(w)
    if record_initial:
        record(start_iter, loss)
    if success(loss):
        return w, StopReason.CONVERGED, loss
    baseline = loss if baseline_loss is None else baseline_loss

    for t in range(start_iter + 1, start_iter + max_iters + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                w_next = step(w, aux)
        except NonFiniteError:
            return w, StopReason.DIVERGED, loss
        stalled = np.array_equal(w_next, w)
        w = w_next
        if stalled:
            record(t, loss)
            return w, StopReason.STALLED, loss
        try:
            loss, aux = loss_and_aux(w)
        except NonFiniteError:
            return w, StopReason.DIVERGED, loss
        if not np.isfinite(loss):
            return w, StopReason.DIVERGED, loss
        done = success(loss) or loss > divergence_factor * baseline or t == start_iter + max_iters
        if (t - start_iter) % record_every == 0 or done:
            record(t, loss)
        if success(loss):
            return w, StopReason.CONVERGED, loss
        if loss > divergence_factor * baseline:
            return w, StopReason.DIVERGED, loss
    return w, StopReason.MAX_ITERS, loss


def _inversion_loss_and_residual(x: Matrix) -> Callable:
    eye = identity(x.shape[0])

    def fn(w: Matrix):
        r = eye - matmul(w, x)
        return half_sumsq(r), r

    return fn


def _make_err_fn(w_star: Matrix | None) -> Callable | None:
    if w_star is None:
        return None
    return lambda w: frobenius_norm(w - w_star)


def solve_inverse_gd(x: Matrix, w0: Matrix, config: SolverConfig,
                     w_star: Matrix | None = None,
                     clock: Callable[[], int] | None = None) -> SolveResult:
    """Full-batch inversion with the adaptive or fixed step rule."""
    _require_square_pair(w0, x)
    rule = config.step_rule
    if isinstance(rule, AdaptiveRight):
        step = lambda w, r: _adaptive_from_residual(w, x, r)
    elif isinstance(rule, FixedStep):
        step = lambda w, r: _fixed_from_residual(w, x, r, rule.eta)
    else:
        raise ValueError(f"solve_inverse_gd supports adaptive-right or fixed rules, got {rule}")
    trace = Trace()
    w, stop, _ = _drive(
        w0.copy(),
        loss_and_aux=_inversion_loss_and_residual(x),
        step=step,
        tol_loss=config.tol_loss,
        max_iters=config.max_iters,
        divergence_factor=config.divergence_factor,
        record_every=config.record_every,
        err_fn=_make_err_fn(w_star),
        trace=trace,
        clock=clock,
    )
    return SolveResult(w, trace, stop)


def solve_newton(x: Matrix, w0: Matrix, config: SolverConfig,
                 w_star: Matrix | None = None,
                 clock: Callable[[], int] | None = None) -> SolveResult:
    """Newton baseline 2W - WXW under the same stop rules as solve_inverse_gd."""
    _require_square_pair(w0, x)
    eye = identity(x.shape[0])

    def loss_and_aux(w):
        t = matmul(w, x)
        return half_sumsq(eye - t), t

    def step(w, t):
        out = 2.0 * w - matmul(t, w)
        if not np.isfinite(out).all():
            raise NonFiniteError("newton_step produced non-finite entries")
        return out

    trace = Trace()
    w, stop, _ = _drive(
        w0.copy(),
        loss_and_aux=loss_and_aux,
        step=step,
        tol_loss=config.tol_loss,
        max_iters=config.max_iters,
        divergence_factor=config.divergence_factor,
        record_every=config.record_every,
        err_fn=_make_err_fn(w_star),
        trace=trace,
        clock=clock,
    )
    return SolveResult(w, trace, stop)


def solve_kaczmarz(x: Matrix, w0: Matrix, config: SolverConfig,
                   w_star: Matrix | None = None,
                   clock: Callable[[], int] | None = None) -> SolveResult:
    """Randomized Kaczmarz baseline; one trace record per sweep."""
    _require_square_pair(w0, x)
    rng = make_rng(config.seed)
    trace = Trace()
    w, stop, _ = _drive(
        w0.copy(),
        loss_and_aux=_inversion_loss_and_residual(x),
        step=lambda w, r: kaczmarz_sweep(w, x, rng),
        tol_loss=config.tol_loss,
        max_iters=config.max_iters,
        divergence_factor=config.divergence_factor,
        record_every=config.record_every,
        err_fn=_make_err_fn(w_star),
        trace=trace,
        clock=clock,
    )
    return SolveResult(w, trace, stop)


def solve_polyrate(x: Matrix, y: Matrix, w0: Matrix, config: SolverConfig,
                   w_star: Matrix | None = None,
                   clock: Callable[[], int] | None = None) -> SolveResult:
    """Linear-system descent W + (Y - WX) X^T P(W^T W) for a scalar polynomial P."""
    rule = config.step_rule
    if not isinstance(rule, MatrixPolynomial):
        raise ValueError("solve_polyrate requires a matrix-polynomial step rule")

    def loss_and_aux(w):
        r = y - matmul(w, x)
        return half_sumsq(r), r

    def step(w, r):
        out = _polyrate_from_residual(w, r, x, rule.coeffs)
        if not np.isfinite(out).all():
            raise NonFiniteError("polyrate step produced non-finite entries")
        return out

    trace = Trace()
    w, stop, _ = _drive(
        w0.copy(),
        loss_and_aux=loss_and_aux,
        step=step,
        tol_loss=config.tol_loss,
        max_iters=config.max_iters,
        divergence_factor=config.divergence_factor,
        record_every=config.record_every,
        err_fn=_make_err_fn(w_star),
        trace=trace,
        clock=clock,
    )
    return SolveResult(w, trace, stop)


def solve_inverse_root(x: Matrix, w0: Matrix, d: int, config: SolverConfig,
                       w_star: Matrix | None = None,
                       clock: Callable[[], int] | None = None) -> SolveResult:
    """Inverse d-th root of an SPD matrix from a commuting initialization."""
    _require_square_pair(w0, x)
    rule = config.step_rule
    if not isinstance(rule, AdaptiveRoot) or rule.d != d:
        raise ValueError(f"config.step_rule must be AdaptiveRoot(d={d}), got {rule}")
    asym = frobenius_norm(x - x.T)
    if asym > 1e-10 * frobenius_norm(x):
        raise ValueError(f"X must be symmetric positive definite; asymmetry {asym:.3e}")
    eye = identity(x.shape[0])

    def loss_and_aux(w):
        return half_sumsq(eye - matmul(_mat_power(w, d), x)), None

    trace = Trace()
    w, stop, _ = _drive(
        w0.copy(),
        loss_and_aux=loss_and_aux,
        step=lambda w, _aux: root_gd_step(w, x, d),
        tol_loss=config.tol_loss,
        max_iters=config.max_iters,
        divergence_factor=config.divergence_factor,
        record_every=config.record_every,
        err_fn=_make_err_fn(w_star),
        trace=trace,
        clock=clock,
    )
    return SolveResult(w, trace, stop)


def solve_inverse_sgd(x: Matrix, w0: Matrix, config: SolverConfig,
                      w_star: Matrix | None = None,
                      clock: Callable[[], int] | None = None) -> SolveResult:
    """Column-stochastic inversion; an epoch applies n single-column updates.

    The cyclic schedule visits every column exactly once per epoch in a fresh
    random order; the iid schedule draws n columns uniformly with replacement.
    The residual I - WX is maintained incrementally (each update is rank one)
    and recomputed exactly at every epoch boundary, where the convergence and
    stall checks run. Divergence is checked at every step.
    """
    _require_square_pair(w0, x)
    if config.schedule is None:
        raise ValueError("solve_inverse_sgd requires config.schedule")
    if not isinstance(config.step_rule, AdaptiveRight):
        raise ValueError("solve_inverse_sgd uses the adaptive-right step rule")
    n = x.shape[0]
    rng = make_rng(config.seed)
    eye = identity(n)
    err_fn = _make_err_fn(w_star)

    w = w0.copy()
    resid = eye - matmul(w, x)
    loss = half_sumsq(resid)
    trace = Trace()

    def record(it: int, smp: int | None) -> None:
        trace.append(
            TraceRecord(
                iter=it,
                loss=loss,
                epoch=it // n,
                sample_index=smp,
                err_fro=err_fn(w) if err_fn is not None else None,
                wallclock_ns=clock() if clock is not None else 0,
            )
        )

    record(0, None)
    if loss <= config.tol_loss:
        return SolveResult(w, trace, StopReason.CONVERGED)
    baseline = loss

    step_count = 0
    for _epoch in range(config.max_epochs):
        if config.schedule is EpochSchedule.CYCLIC:
            order = rng.permutation(n)
        else:
            order = rng.integers(0, n, size=n)
        w_epoch_start = w.copy()
        for i in order:
            i = int(i)
            step_count += 1
            e_col = np.zeros(n)
            e_col[i] = 1.0
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    r, v = _adaptive_sgd_update(w, x[:, i], e_col)
                    w = w + np.multiply.outer(r, v)
                    resid = resid - np.multiply.outer(r, matvec(x.T, v))
            except NonFiniteError:
                return SolveResult(w, trace, StopReason.DIVERGED)
            boundary = step_count % n == 0
            if boundary:  # exact residual at epoch ends
                resid = eye - matmul(w, x)
            loss = half_sumsq(resid)
            if not np.isfinite(loss) or not np.isfinite(w).all():
                return SolveResult(w, trace, StopReason.DIVERGED)
            diverged = loss > config.divergence_factor * baseline
            if step_count % config.record_every == 0 or boundary or diverged:
                record(step_count, i)
            if diverged:
                return SolveResult(w, trace, StopReason.DIVERGED)
        if loss <= config.tol_loss:
            return SolveResult(w, trace, StopReason.CONVERGED)
        if np.array_equal(w, w_epoch_start):
            return SolveResult(w, trace, StopReason.STALLED)
    return SolveResult(w, trace, StopReason.MAX_EPOCHS)


def solve_hybrid(x: Matrix, config_warm: SolverConfig, config_adaptive: SolverConfig,
                 switch_loss: float, warm_method: str = "fixed-gd",
                 w_star: Matrix | None = None,
                 clock: Callable[[], int] | None = None) -> SolveResult:
    """Warm start from zero with a linear-rate method, then switch to the
    adaptive rule once the loss drops below `switch_loss`.

    Trace records carry phase labels "warm" and "adaptive"; the switch
    iteration is the first record of the adaptive phase.
    """
    if x.shape[0] != x.shape[1]:
        raise ValueError("X must be square")
    if not (np.isfinite(switch_loss) and switch_loss > 0.0):
        raise ValueError("switch_loss must be finite and > 0")
    if switch_loss <= config_adaptive.tol_loss:
        raise ValueError("switch_loss must exceed the adaptive phase tol_loss")
    if not isinstance(config_adaptive.step_rule, AdaptiveRight):
        raise ValueError("the adaptive phase requires the adaptive-right step rule")

    n = x.shape[0]
    loss_and_aux = _inversion_loss_and_residual(x)
    if warm_method == "fixed-gd":
        rule = config_warm.step_rule
        if not isinstance(rule, FixedStep):
            raise ValueError("warm_method 'fixed-gd' requires a fixed step rule")
        warm_step = lambda w, r: _fixed_from_residual(w, x, r, rule.eta)
    elif warm_method == "kaczmarz":
        rng = make_rng(config_warm.seed)
        warm_step = lambda w, r: kaczmarz_sweep(w, x, rng)
    else:
        raise ValueError(f"unknown warm_method {warm_method!r}")

    trace = Trace()
    err_fn = _make_err_fn(w_star)
    w, stop, loss = _drive(
        np.zeros((n, n)),
        loss_and_aux=loss_and_aux,
        step=warm_step,
        tol_loss=config_warm.tol_loss,
        max_iters=config_warm.max_iters,
        divergence_factor=config_warm.divergence_factor,
        record_every=config_warm.record_every,
        err_fn=err_fn,
        trace=trace,
        clock=clock,
        phase="warm",
        success=lambda L: L < switch_loss,
    )
    if stop is StopReason.DIVERGED:
        return SolveResult(w, trace, stop)
    if stop is not StopReason.CONVERGED:
        return SolveResult(w, trace, StopReason.WARM_PHASE_STALLED)

    switch_iter = trace.final.iter
    w, stop, _ = _drive(
        w,
        loss_and_aux=loss_and_aux,
        step=lambda w, r: _adaptive_from_residual(w, x, r),
        tol_loss=config_adaptive.tol_loss,
        max_iters=config_adaptive.max_iters,
        divergence_factor=config_adaptive.divergence_factor,
        record_every=config_adaptive.record_every,
        err_fn=err_fn,
        trace=trace,
        clock=clock,
        phase="adaptive",
        start_iter=switch_iter,
        record_initial=False,
        baseline_loss=loss,
    )
    return SolveResult(w, trace, stop)
