"""Backup scheduling on on-demand capacity.

Every task ``t_i`` queued on a spot instance gets a recovery group: the
tasks that would be stranded if the instance hibernated while ``t_i`` runs
(``t_i``, everything overlapping it, and every later task on their cores).
The group is scheduled on the cheapest on-demand instances that still let it
complete before the deadline when launched after ``t_i``'s primary end, and
the latest tolerable launch period ``start_bkp`` is derived from the
group's backup runtime.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import Catalog, VmType, number_of_slots
from .errors import InfeasibleBackup
from .kernels import earliest_fit
from .model import Market, Placement, Role, VmInstance
from .primary import PrimaryMap
from .workload import TaskSpec, effective_duration


@dataclass
class RecoveryGroup:
    anchor_task: str
    source_instance: str
    members: frozenset[str]
    backup_instances: list[VmInstance]
    runtime: int
    start_bkp: int

    def backup_placements(self) -> list[tuple[VmInstance, Placement]]:
        return [(vm, p) for vm in self.backup_instances for p in vm.placements]


@dataclass
class BackupMap:
    deadline: int
    groups: list[RecoveryGroup] = field(default_factory=list)

    @property
    def instances(self) -> list[VmInstance]:
        return [vm for g in self.groups for vm in g.backup_instances]

    def group(self, source_instance: str, anchor_task: str) -> RecoveryGroup:
        for g in self.groups:
            if g.source_instance == source_instance and g.anchor_task == anchor_task:
                return g
        raise KeyError((source_instance, anchor_task))

    def groups_of(self, source_instance: str) -> list[RecoveryGroup]:
        return [g for g in self.groups if g.source_instance == source_instance]


def succ_set(task_id: str, vm: VmInstance) -> set[str]:
    """``task_id`` plus every task on its core starting at or after its end."""
    p = vm.placement_of(task_id)
    return {task_id} | {q.task_id for q in vm.placements if q.core == p.core and q.start >= p.end}


def parallel_set(task_id: str, vm: VmInstance) -> set[str]:
    p = vm.placement_of(task_id)
    return {q.task_id for q in vm.placements if q.task_id != task_id and q.overlaps(p)}


def rec_group(task_id: str, vm: VmInstance) -> set[str]:
    out: set[str] = set()
    for t in parallel_set(task_id, vm) | {task_id}:
        out |= succ_set(t, vm)
    return out


def runtime(group, s_vm) -> int:
    """Periods from a common launch until every backup of ``group`` is done.

    Backup instances boot at offset 0, so the boot time is already contained
    in each placement's end.
    """
    members = set(group)
    ends = [p.end for vm in s_vm for p in vm.placements if p.task_id in members]
    if len(ends) < len(members):
        missing = members - {p.task_id for vm in s_vm for p in vm.placements}
        raise ValueError(f"group members without backup placement: {sorted(missing)}")
    return max(ends, default=0)


def compute_stbkp(rtime: int, deadline: int) -> int:
    if rtime + 1 > deadline:
        raise InfeasibleBackup(f"backup runtime {rtime} leaves no launch period before D={deadline}")
    return deadline - rtime - 1


def _fit_on(task: TaskSpec, vm: VmInstance, deadline: int) -> Placement | None:
    dur = effective_duration(task, vm.vm_type)
    core, start = earliest_fit(*vm.kernel_args(), vm.vm_type.vcpus, vm.boot_end, deadline,
                               dur, task.memory, vm.vm_type.memory)
    if core < 0:
        return None
    return Placement(task, core, start, start + dur)


def backup_cost(task: TaskSpec, vm_type: VmType, billing) -> float:
    return vm_type.od_price * number_of_slots(effective_duration(task, vm_type), billing)


def get_best_vm(task: TaskSpec, candidates, deadline: int, end_ti: int, billing,
                current_runtime: int = 0):
    """Cheapest candidate that keeps ``end_ti + runtime < deadline``.

    ``candidates`` is either a list of already-selected backup instances or
    an iterable of catalog types (a fresh instance is implied). Cost is the
    on-demand price times the slots the task alone needs; equal-cost
    instances are ranked by earliest finish, equal-cost types by name.
    Returns ``None`` when no candidate is feasible.
    """
    best = None
    best_key = None
    for c in candidates:
        if isinstance(c, VmInstance):
            vtype = c.vm_type
            if vtype.memory < task.memory:
                continue
            pl = _fit_on(task, c, deadline)
            if pl is None:
                continue
            finish = pl.end
            tie = (finish, c.instance_id)
        else:
            vtype = c
            if vtype.memory < task.memory:
                continue
            finish = vtype.boot_time + effective_duration(task, vtype)
            tie = (vtype.name,)
        if end_ti + max(current_runtime, finish) >= deadline:
            continue
        key = (backup_cost(task, vtype, billing),) + tie
        if best_key is None or key < best_key:
            best, best_key = c, key
    return best


def _member_order(members, vm: VmInstance) -> list[Placement]:
    ps = [vm.placement_of(t) for t in members]
    # equal memory: longest first keeps the group runtime short
    return sorted(ps, key=lambda p: (-p.task.memory, -p.task.base_duration, p.start, p.task_id))


def schedule_backup(pq: PrimaryMap, catalog: Catalog, deadline: int | None = None) -> BackupMap:
    """Derive the backup map for every task of every spot instance in ``pq``.

    Raises
    ------
    InfeasibleBackup
        Some recovery group cannot complete before the deadline.
    """
    D = pq.deadline if deadline is None else deadline
    billing = catalog.billing
    slot = billing.slot_periods
    bq = BackupMap(D)
    counter = 0
    for vm in sorted(pq.spot_instances(), key=lambda v: v.instance_id):
        for anchor in vm.queue():
            end_ti = anchor.end
            members = rec_group(anchor.task_id, vm)
            s_vm: list[VmInstance] = []
            rt = 0
            for member in _member_order(members, vm):
                task = member.task
                choice = get_best_vm(task, s_vm, D, end_ti, billing, rt)
                if choice is None:
                    vtype = get_best_vm(task, catalog.types, D, end_ti, billing, rt)
                    if vtype is None:
                        raise InfeasibleBackup(
                            f"no on-demand type can back up task {task.task_id} of group "
                            f"{vm.instance_id}/{anchor.task_id} before D={D} "
                            f"(primary ends at {end_ti}, group runtime so far {rt})")
                    choice = VmInstance(f"bkp{counter:04d}", vtype, Market.ON_DEMAND,
                                        0, slot, Role.BACKUP)
                    counter += 1
                    s_vm.append(choice)
                pl = _fit_on(task, choice, D)
                choice.placements.append(pl)
                choice.end_slot = max(choice.end_slot, number_of_slots(pl.end, billing) * slot)
                rt = max(rt, pl.end)
            rt = runtime(members, s_vm)
            st = compute_stbkp(rt, D)
            bq.groups.append(RecoveryGroup(anchor.task_id, vm.instance_id, frozenset(members),
                                           s_vm, rt, st))
    return bq
