"""Bag-of-tasks job descriptions and the slowdown duration model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ParseError, ValidationError

JOB_HEADER = ("task_id", "base_duration_periods", "memory_gb")

# guards ceil() against products like 0.1 * 30 = 3.0000000000000004
_EPS = 1e-9


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    base_duration: int
    memory: float

    def __post_init__(self):
        if not isinstance(self.base_duration, int) or self.base_duration < 1:
            raise ValidationError(
                f"task {self.task_id!r}: base_duration must be an integer >= 1, "
                f"got {self.base_duration!r}")
        if not self.memory > 0:
            raise ValidationError(
                f"task {self.task_id!r}: memory must be > 0, got {self.memory!r}")


@dataclass(frozen=True)
class Job:
    job_id: str
    tasks: tuple[TaskSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.tasks:
            raise ValidationError(f"job {self.job_id!r} has no tasks")
        seen = set()
        for t in self.tasks:
            if t.task_id in seen:
                raise ValidationError(f"job {self.job_id!r}: duplicate task_id {t.task_id!r}")
            seen.add(t.task_id)

    def __len__(self):
        return len(self.tasks)

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise KeyError(task_id)


def effective_duration(task: TaskSpec, vm) -> int:
    """Duration of ``task`` in periods on VM type ``vm``.

    The baseline duration is scaled by the type's slowdown and rounded up,
    never below one period.
    """
    return max(1, math.ceil(task.base_duration * vm.slowdown - _EPS))


def hours_to_periods(hours: float, period_minutes: int = 1) -> int:
    """Round an hour figure to the nearest whole period."""
    return int(math.floor(hours * 60.0 / period_minutes + 0.5))


def load_job(path, job_id: str | None = None) -> Job:
    """Read a job CSV (``task_id,base_duration_periods,memory_gb``).

    Raises
    ------
    ParseError
        Wrong header or a row that does not convert to numbers.
    ValidationError
        Non-positive duration/memory, duplicate ids or an empty job.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != JOB_HEADER:
            raise ParseError(f"{path}: expected header {','.join(JOB_HEADER)}, got {header}")
        tasks = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            tid, dur, mem = (c.strip() for c in row)
            if not tid:
                raise ParseError(f"{path}:{lineno}: empty task_id")
            try:
                dur_f = float(dur)
                mem_f = float(mem)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric field in {row}") from None
            if not math.isfinite(dur_f) or dur_f != int(dur_f):
                raise ParseError(f"{path}:{lineno}: duration {dur!r} is not a whole period count")
            tasks.append(TaskSpec(tid, int(dur_f), mem_f))
    return Job(job_id or path.stem, tuple(tasks))


def dump_job(job: Job, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JOB_HEADER)
        for t in job.tasks:
            writer.writerow([t.task_id, t.base_duration, repr(float(t.memory))])


def make_job(job_id: str, rows: Iterable[tuple[str, int, float]]) -> Job:
    return Job(job_id, tuple(TaskSpec(*r) for r in rows))
