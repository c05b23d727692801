"""Command-line front end.

    quadinv preset NAME [--n N] [--seed S] [--out DIR] [--format csv|json]
    quadinv custom --method M --n N --out PATH [method-specific flags]

Trace files are byte-reproducible: the same flags and seed always produce
identical bytes. The environment variable QUADINV_SEED overrides the default
seed when --seed is not given.

Exit codes: 0 run reached a terminal state (including intentional
linear-rate arms), 2 usage error, 3 divergence, 4 I/O failure, 5 generation
failure, 1 other internal error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import analysis, traceio
from .errors import GenerationError, NonFiniteError
from .linalg import frobenius_norm, make_rng
from .presets import (
    PRESET_DEFAULTS,
    PRESET_NAMES,
    ROOT_DEMO_D,
    ArmSummary,
    ExperimentPreset,
    format_summary,
    normalized_rank_deficient,
    root_demo_init_scale,
    run_preset,
    scaled_window,
)
from .problems import RandomMatrixSpec, ScaledIdentity, ScaledTrueInverse, ZeroInit, gen_invertible, gen_spd, make_init
from .solvers import (
    AdaptiveRight,
    AdaptiveRoot,
    CommutatorDriftError,
    EpochSchedule,
    FixedStep,
    MatrixPolynomial,
    SolverConfig,
    solve_hybrid,
    solve_inverse_gd,
    solve_inverse_root,
    solve_inverse_sgd,
    solve_kaczmarz,
    solve_newton,
    solve_polyrate,
)
from .trace import StopReason

METHODS = ("adaptive-gd", "adaptive-sgd", "root", "newton", "fixed-gd",
           "kaczmarz", "hybrid", "polyrate")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_IO = 4
EXIT_GENERATION = 5


class _UsageError(Exception):
    pass


def _default_seed(flag_value, fallback: int) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("QUADINV_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"QUADINV_SEED must be an integer, got {env!r}")
    return fallback


def _parse_init(text: str):
    if text == "zero":
        return ZeroInit()
    for prefix, cls in (("scaled-inverse:", ScaledTrueInverse),
                        ("scaled-identity:", ScaledIdentity)):
        if text.startswith(prefix):
            try:
                return cls(float(text[len(prefix):]))
            except ValueError:
                raise _UsageError(f"bad init scale in {text!r}")
    raise _UsageError(
        f"bad --init {text!r}; expected zero, scaled-inverse:<c> or scaled-identity:<c>")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadinv",
        description="Matrix inversion experiments with an adaptive right-multiplicative step size.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="run a named experiment preset")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--n", type=int, default=None, help="dimension override")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    c = sub.add_parser("custom", help="run a single solver with explicit flags")
    c.add_argument("--method", choices=METHODS, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--d", type=int, default=None, help="root degree (root method only)")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--init", type=str, default=None,
                   help="zero | scaled-inverse:<c> | scaled-identity:<c>")
    c.add_argument("--schedule", choices=("cyclic", "iid"), default=None)
    c.add_argument("--eta", type=float, default=None)
    c.add_argument("--coeffs", type=str, default=None, help="c0,c1,... (polyrate only)")
    c.add_argument("--switch-loss", type=float, default=None)
    c.add_argument("--tol", type=float, default=1e-24)
    c.add_argument("--max-iters", type=int, default=1000)
    c.add_argument("--max-epochs", type=int, default=100)
    c.add_argument("--record-every", type=int, default=1)
    c.add_argument("--condition-cap", type=float, default=1e4)
    c.add_argument("--out", type=Path, required=True, help="trace file path")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


_DEFAULT_INITS = {
    "adaptive-gd": "scaled-inverse:0.4",
    "adaptive-sgd": "scaled-inverse:0.5",
    "newton": "scaled-inverse:0.4",
    "polyrate": "scaled-inverse:0.999",
    "fixed-gd": "zero",
    "kaczmarz": "zero",
}


def _check_flag_compat(args) -> None:
    pairs = (
        ("--schedule", args.schedule, ("adaptive-sgd",)),
        ("--eta", args.eta, ("fixed-gd", "hybrid")),
        ("--coeffs", args.coeffs, ("polyrate",)),
        ("--switch-loss", args.switch_loss, ("hybrid",)),
        ("--d", args.d, ("root",)),
    )
    for flag, value, methods in pairs:
        if value is not None and args.method not in methods:
            raise _UsageError(
                f"{flag} is not valid with --method {args.method} "
                f"(only for {', '.join(methods)})")
    if args.method == "fixed-gd" and args.eta is None:
        raise _UsageError("--method fixed-gd requires --eta")
    if args.method == "hybrid" and args.eta is None:
        raise _UsageError("--method hybrid requires --eta for the warm phase")


def _run_custom(args) -> int:
    _check_flag_compat(args)
    seed = _default_seed(args.seed, 0)
    n = args.n
    method = args.method
    init_text = args.init or _DEFAULT_INITS.get(method)
    cap = args.condition_cap

    meta = {
        "method": method, "n": n, "seed": seed, "condition_cap": cap,
        "tol_loss": args.tol, "max_iters": args.max_iters,
        "max_epochs": args.max_epochs, "record_every": args.record_every,
        "format": args.format,
    }
    per_epoch = method == "adaptive-sgd"

    if method == "polyrate":
        coeffs = tuple(float(c) for c in args.coeffs.split(",")) if args.coeffs else (0.0, 1.0)
        rank = max(1, n // 2)
        x, y, w_star = normalized_rank_deficient(n, seed, rank)
        w0 = make_init(_parse_init(init_text), n, x=x, w_star=w_star)
        cfg = SolverConfig(step_rule=MatrixPolynomial(coeffs), tol_loss=args.tol,
                           max_iters=args.max_iters, record_every=args.record_every)
        result = solve_polyrate(x, y, w0, cfg, w_star=w_star)
        meta.update(rank=rank, coeffs=list(coeffs), init=init_text)
        ref_norm = frobenius_norm(w_star)
    elif method == "root":
        d = args.d if args.d is not None else ROOT_DEMO_D
        x, droot = gen_spd(n, make_rng(seed), condition_cap=cap, max_redraws=200000)
        gt = droot(d)
        if init_text is None:
            init_text = f"scaled-identity:{root_demo_init_scale(x, d)!r}"
        w0 = make_init(_parse_init(init_text), n, x=x)
        cfg = SolverConfig(step_rule=AdaptiveRoot(d), tol_loss=args.tol,
                           max_iters=args.max_iters, record_every=args.record_every)
        result = solve_inverse_root(x, w0, d, cfg, w_star=gt)
        meta.update(d=d, init=init_text)
        ref_norm = frobenius_norm(gt)
    else:
        spec = RandomMatrixSpec(n=n, seed=seed, condition_cap=cap)
        x, w_star, _sigma = gen_invertible(spec)
        ref_norm = frobenius_norm(w_star)
        cfg_kwargs = dict(tol_loss=args.tol, max_iters=args.max_iters,
                          max_epochs=args.max_epochs, record_every=args.record_every,
                          seed=seed)
        if method == "hybrid":
            switch = args.switch_loss if args.switch_loss is not None else 1e-4
            result = solve_hybrid(
                x,
                SolverConfig(step_rule=FixedStep(args.eta), **cfg_kwargs),
                SolverConfig(step_rule=AdaptiveRight(), **cfg_kwargs),
                switch_loss=switch, w_star=w_star)
            meta.update(eta=args.eta, switch_loss=switch, init="zero")
        else:
            w0 = make_init(_parse_init(init_text), n, x=x, w_star=w_star)
            meta.update(init=init_text)
            if method == "adaptive-gd":
                cfg = SolverConfig(step_rule=AdaptiveRight(), **cfg_kwargs)
                result = solve_inverse_gd(x, w0, cfg, w_star=w_star)
            elif method == "newton":
                cfg = SolverConfig(step_rule=AdaptiveRight(), **cfg_kwargs)
                result = solve_newton(x, w0, cfg, w_star=w_star)
            elif method == "fixed-gd":
                cfg = SolverConfig(step_rule=FixedStep(args.eta), **cfg_kwargs)
                result = solve_inverse_gd(x, w0, cfg, w_star=w_star)
                meta.update(eta=args.eta)
            elif method == "kaczmarz":
                cfg = SolverConfig(step_rule=AdaptiveRight(), **cfg_kwargs)
                result = solve_kaczmarz(x, w0, cfg, w_star=w_star)
            else:  # adaptive-sgd
                sched = EpochSchedule.CYCLIC if (args.schedule or "cyclic") == "cyclic" else EpochSchedule.IID
                cfg = SolverConfig(step_rule=AdaptiveRight(), schedule=sched, **cfg_kwargs)
                result = solve_inverse_sgd(x, w0, cfg, w_star=w_star)
                meta.update(schedule=sched.value)

    path = args.out
    if args.format == "csv":
        traceio.write_csv(result.trace, path)
    else:
        traceio.write_json(result.trace, meta, path)
    trace = traceio.read_csv(path) if args.format == "csv" else traceio.read_json(path)[1]
    errs = trace.epoch_errs() if per_epoch else trace.errs()
    window = scaled_window(ref_norm)
    if errs:
        order = analysis.estimate_order(errs, window)
    else:
        order = analysis.OrderEstimate(math.nan, math.nan, 0, math.nan, window)
    summary = ArmSummary(arm=method, path=path, final_loss=trace.final.loss,
                         iters=trace.final.iter, epochs=trace.final.epoch,
                         order=order, stop=result.stop)
    print(format_summary([summary]))
    return EXIT_DIVERGED if result.stop is StopReason.DIVERGED else EXIT_OK


def _run_preset(args) -> int:
    defaults = PRESET_DEFAULTS[args.name]
    n = args.n if args.n is not None else defaults["n"]
    if n < 2:
        raise _UsageError(f"--n must be >= 2, got {n}")
    preset = ExperimentPreset(
        name=args.name,
        n=n,
        seed=_default_seed(args.seed, defaults["seed"]),
        output_dir=args.out,
        fmt=args.format,
    )
    summaries = run_preset(preset)
    print(format_summary(summaries))
    if any(s.stop is StopReason.DIVERGED for s in summaries):
        return EXIT_DIVERGED
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "preset":
            return _run_preset(args)
        return _run_custom(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"generation failure: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CommutatorDriftError, NonFiniteError, ValueError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:  # console-script wrapper
    sys.exit(main())


if __name__ == "__main__":
    entry()
