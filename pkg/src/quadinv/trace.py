"""Per-iteration solve history: records, traces, and stop reasons."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class StopReason(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    MAX_EPOCHS = "max-epochs"
    DIVERGED = "diverged"
    STALLED = "stalled"
    WARM_PHASE_STALLED = "warm-phase-stalled"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class TraceRecord:
    """State snapshot after `iter` update steps (iter 0 is the initial point).

    epoch counts completed epochs (SGD only); phase labels hybrid stages;
    sample_index is the column used by the SGD step that produced this state;
    err_fro is ||W - W*||_F when the true solution is known.
    """

    iter: int
    loss: float
    epoch: int | None = None
    phase: str | None = None
    err_fro: float | None = None
    sample_index: int | None = None
    wallclock_ns: int = 0

    def __post_init__(self):
        if self.iter < 0:
            raise ValueError("iter must be non-negative")
        if not math.isfinite(self.loss) or self.loss < 0.0:
            raise ValueError(f"loss must be finite and non-negative, got {self.loss}")
        if self.err_fro is not None and (not math.isfinite(self.err_fro) or self.err_fro < 0.0):
            raise ValueError(f"err_fro must be finite and non-negative, got {self.err_fro}")
        if self.wallclock_ns < 0:
            raise ValueError("wallclock_ns must be non-negative")


@dataclass
class Trace:
    """Ordered run history; iteration numbers are strictly increasing."""

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.iter <= self.records[-1].iter:
            raise ValueError(
                f"iter must increase: got {record.iter} after {self.records[-1].iter}"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    def errs(self) -> list[float]:
        return [r.err_fro for r in self.records if r.err_fro is not None]

    def epoch_boundary_records(self) -> list[TraceRecord]:
        """Records where the completed-epoch counter increases (plus iter 0)."""
        out: list[TraceRecord] = []
        prev_epoch: int | None = None
        for r in self.records:
            if r.epoch is None:
                continue
            if prev_epoch is None or r.epoch > prev_epoch:
                out.append(r)
                prev_epoch = r.epoch
        return out

    def epoch_errs(self) -> list[float]:
        return [r.err_fro for r in self.epoch_boundary_records() if r.err_fro is not None]

    def phase_switch_iters(self) -> list[int]:
        """Iterations at which the phase label changes."""
        out: list[int] = []
        prev: str | None = None
        for r in self.records:
            if r.phase != prev and prev is not None:
                out.append(r.iter)
            prev = r.phase
        return out
