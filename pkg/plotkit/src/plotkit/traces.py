"""Reader for the solver trace CSV schema.

The producing tool writes one header plus one row per record:

    iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns

Optional fields are empty. This module parses the file into plain records
and deliberately has no dependency on the producing package.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = "iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns"


class TraceFormatError(ValueError):
    """The file does not match the trace CSV schema."""


@dataclass(frozen=True)
class Record:
    iter: int
    epoch: int | None
    phase: str | None
    sample_index: int | None
    loss: float
    err_fro: float | None
    wallclock_ns: int


def read_trace(path: str | Path) -> list[Record]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trace file not found: {path}")
    lines = [ln for ln in path.read_text(encoding="ascii").split("\n") if ln]
    if not lines or lines[0] != EXPECTED_HEADER:
        raise TraceFormatError(
            f"{path}: bad or missing header (expected {EXPECTED_HEADER!r})")
    records = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 7:
            raise TraceFormatError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
        it, epoch, phase, sample, loss, err, wall = parts
        try:
            records.append(Record(
                iter=int(it),
                epoch=int(epoch) if epoch else None,
                phase=phase or None,
                sample_index=int(sample) if sample else None,
                loss=float(loss),
                err_fro=float(err) if err else None,
                wallclock_ns=int(wall),
            ))
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
    if not records:
        raise TraceFormatError(f"{path}: no records")
    return records
