"""Trace file formats.

CSV schema (header mandatory, one row per record):

    iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns

Missing optionals are empty fields; floats use the shortest round-trip
decimal form, so parse(emit(trace)) == trace and identical traces emit
byte-identical files. JSON files carry a `meta` object echoing the run
configuration plus the same records.
"""

from __future__ import annotations

import json
from pathlib import Path

from .trace import Trace, TraceRecord

CSV_HEADER = "iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns"


def _fmt_float(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def _fmt_int(x: int | None) -> str:
    return "" if x is None else str(int(x))


def trace_to_csv(trace: Trace) -> str:
    lines = [CSV_HEADER]
    for r in trace:
        lines.append(
            ",".join(
                (
                    str(r.iter),
                    _fmt_int(r.epoch),
                    r.phase or "",
                    _fmt_int(r.sample_index),
                    repr(float(r.loss)),
                    _fmt_float(r.err_fro),
                    str(r.wallclock_ns),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(trace: Trace, path: str | Path) -> None:
    Path(path).write_bytes(trace_to_csv(trace).encode("ascii"))


def trace_from_csv(text: str) -> Trace:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"bad or missing CSV header, expected {CSV_HEADER!r}")
    trace = Trace()
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 7:
            raise ValueError(f"bad CSV row (expected 7 fields): {ln!r}")
        it, epoch, phase, sample, loss, err, wall = parts
        trace.append(
            TraceRecord(
                iter=int(it),
                epoch=int(epoch) if epoch else None,
                phase=phase or None,
                sample_index=int(sample) if sample else None,
                loss=float(loss),
                err_fro=float(err) if err else None,
                wallclock_ns=int(wall),
            )
        )
    return trace


def read_csv(path: str | Path) -> Trace:
    return trace_from_csv(Path(path).read_text(encoding="ascii"))


def _record_to_dict(r: TraceRecord) -> dict:
    return {
        "iter": r.iter,
        "epoch": r.epoch,
        "phase": r.phase,
        "sample_index": r.sample_index,
        "loss": r.loss,
        "err_fro": r.err_fro,
        "wallclock_ns": r.wallclock_ns,
    }


def write_json(trace: Trace, meta: dict, path: str | Path) -> None:
    payload = {"meta": meta, "records": [_record_to_dict(r) for r in trace]}
    Path(path).write_bytes(json.dumps(payload, indent=1).encode("ascii"))


def read_json(path: str | Path) -> tuple[dict, Trace]:
    payload = json.loads(Path(path).read_text(encoding="ascii"))
    trace = Trace()
    for d in payload["records"]:
        trace.append(TraceRecord(**d))
    return payload["meta"], trace
