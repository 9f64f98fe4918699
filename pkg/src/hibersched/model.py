"""Allocated VM instances and task placements shared by both schedulers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .catalog import VmType
from .workload import TaskSpec


class Market(str, Enum):
    SPOT = "spot"
    ON_DEMAND = "on-demand"


class Role(str, Enum):
    PRIMARY = "primary"
    BACKUP = "backup"


@dataclass(frozen=True)
class Placement:
    """A task on one core of an instance over ``[start, end)``."""

    task: TaskSpec
    core: int
    start: int
    end: int

    @property
    def task_id(self) -> str:
        return self.task.task_id

    @property
    def duration(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Placement") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass
class VmInstance:
    instance_id: str
    vm_type: VmType
    market: Market
    start_slot: int
    end_slot: int
    role: Role = Role.PRIMARY
    placements: list[Placement] = field(default_factory=list)

    @property
    def boot_end(self) -> int:
        return self.start_slot + self.vm_type.boot_time

    @property
    def last_end(self) -> int | None:
        return max((p.end for p in self.placements), default=None)

    def waste(self) -> int:
        """Idle tail of the last contracted slot; an empty instance wastes its whole span."""
        last = self.last_end
        if last is None:
            return self.end_slot - self.start_slot
        return self.end_slot - last

    def cores(self) -> list[list[Placement]]:
        out = [[] for _ in range(self.vm_type.vcpus)]
        for p in sorted(self.placements, key=lambda p: (p.start, p.task_id)):
            out[p.core].append(p)
        return out

    def placement_of(self, task_id: str) -> Placement:
        for p in self.placements:
            if p.task_id == task_id:
                return p
        raise KeyError(f"{task_id} not on {self.instance_id}")

    def has_task(self, task_id: str) -> bool:
        return any(p.task_id == task_id for p in self.placements)

    def queue(self) -> list[Placement]:
        """Placements in execution order (start, then core)."""
        return sorted(self.placements, key=lambda p: (p.start, p.core, p.task_id))

    def kernel_args(self):
        ps = self.placements
        return ([p.start for p in ps], [p.end for p in ps],
                [p.core for p in ps], [p.task.memory for p in ps])

    def memory_in_use(self, period: int) -> float:
        return sum(p.task.memory for p in self.placements if p.start <= period < p.end)
