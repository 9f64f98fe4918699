"""Greedy primary scheduling over spot and on-demand instances.

Tasks are taken in descending memory order. Each one is first inserted into
idle time of slots that are already paid for (instances with the largest
waste first), then into freshly contracted slots of an allocated instance
(smallest waste first), and only then onto a newly acquired instance of the
fastest type, bought on the spot market whenever that is cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .catalog import Catalog, VmType, number_of_slots
from .errors import Infeasible, NoFeasibleVm
from .kernels import earliest_fit
from .model import Market, Placement, Role, VmInstance
from .workload import Job, TaskSpec, effective_duration


@dataclass
class PrimaryMap:
    instances: list[VmInstance]
    deadline: int
    vm_time_limit: float
    job_id: str = ""
    tasks: dict[str, TaskSpec] = field(default_factory=dict)

    @property
    def limit(self) -> int:
        return occupation_limit(self.deadline, self.vm_time_limit)

    def instance(self, instance_id: str) -> VmInstance:
        for vm in self.instances:
            if vm.instance_id == instance_id:
                return vm
        raise KeyError(instance_id)

    def spot_instances(self) -> list[VmInstance]:
        return [vm for vm in self.instances if vm.market is Market.SPOT]

    def placements(self) -> list[tuple[VmInstance, Placement]]:
        return [(vm, p) for vm in self.instances for p in vm.placements]

    def makespan(self) -> int:
        return max((vm.last_end or 0) for vm in self.instances) if self.instances else 0


def occupation_limit(deadline: int, vm_time_limit: float) -> int:
    # floor keeps the inclusive comparison conservative
    return int(math.floor(deadline * vm_time_limit + 1e-9))


def waste(vm: VmInstance) -> int:
    return vm.waste()


def check_insertion(task: TaskSpec, vm: VmInstance, limit: int) -> Placement | None:
    """Earliest placement of ``task`` inside ``vm``'s contracted slots, or ``None``.

    The window has to fit on one free core, keep memory within the type's
    capacity for its whole length and end no later than ``limit``.
    """
    dur = effective_duration(task, vm.vm_type)
    hi = min(vm.end_slot, limit)
    core, start = earliest_fit(*vm.kernel_args(), vm.vm_type.vcpus, vm.boot_end, hi,
                               dur, task.memory, vm.vm_type.memory)
    if core < 0:
        return None
    return Placement(task, core, start, start + dur)


def best_vm(task: TaskSpec, types) -> VmType:
    """Type running ``task`` in the fewest periods.

    Ties: cheaper ``min(spot, on-demand)`` price, then name.
    """
    feasible = [t for t in types if t.memory >= task.memory]
    if not feasible:
        raise NoFeasibleVm(f"task {task.task_id} needs {task.memory} GB; no VM type is large enough")
    return min(feasible, key=lambda t: (effective_duration(task, t),
                                        min(t.spot_price, t.od_price), t.name))


def choose_market(vm_type: VmType) -> Market:
    if vm_type.hibernation_capable and vm_type.spot_price < vm_type.od_price:
        return Market.SPOT
    return Market.ON_DEMAND


def _market_for(vtype: VmType, forced: Market | None) -> Market:
    if forced is Market.SPOT and not vtype.hibernation_capable:
        return Market.ON_DEMAND
    return forced or choose_market(vtype)


def schedule_primary(job: Job, catalog: Catalog, deadline: int, vm_time_limit: float,
                     market: Market | str | None = None) -> PrimaryMap:
    """Build the primary map for ``job``.

    Parameters
    ----------
    deadline
        Deadline ``D`` in periods.
    vm_time_limit
        Fraction of ``D`` that bounds every primary instance's occupation.
    market
        Force every new instance into this market (used by the on-demand-only
        baseline). ``None`` applies the price rule.

    Raises
    ------
    Infeasible
        A task cannot finish by ``D * vm_time_limit`` even on the fastest type.
    """
    if deadline < 1:
        raise ValueError("deadline must be >= 1 period")
    if not 0 < vm_time_limit <= 1:
        raise ValueError("vm_time_limit must be in (0, 1]")
    forced = Market(market) if market is not None else None
    billing = catalog.billing
    slot = billing.slot_periods
    limit = occupation_limit(deadline, vm_time_limit)
    allocated: list[VmInstance] = []

    for task in sorted(job.tasks, key=lambda t: (-t.memory, t.task_id)):
        placed = None
        for vm in sorted(allocated, key=lambda v: (-v.waste(), v.instance_id)):
            placed = check_insertion(task, vm, limit)
            if placed is not None:
                vm.placements.append(placed)
                break
        if placed is not None:
            continue

        target = None
        for vm in sorted(allocated, key=lambda v: (v.waste(), v.instance_id)):
            if vm.vm_type.memory < task.memory:
                continue
            n = number_of_slots(effective_duration(task, vm.vm_type), billing)
            if vm.end_slot + n * slot <= limit:
                vm.end_slot += n * slot
                target = vm
                break

        if target is None:
            try:
                vtype = best_vm(task, catalog.types)
            except NoFeasibleVm as exc:
                raise Infeasible(str(exc)) from exc
            dur = effective_duration(task, vtype)
            if vtype.boot_time + dur > limit:
                raise Infeasible(
                    f"task {task.task_id} needs {vtype.boot_time + dur} periods on {vtype.name} "
                    f"(fastest type incl. boot) but the occupation limit is {limit}")
            n = number_of_slots(vtype.boot_time + dur, billing)
            target = VmInstance(
                instance_id=f"vm{len(allocated):03d}",
                vm_type=vtype,
                market=_market_for(vtype, forced),
                start_slot=0,
                end_slot=n * slot,
                role=Role.PRIMARY,
            )
            allocated.append(target)

        placed = check_insertion(task, target, limit)
        if placed is None:  # pragma: no cover - fresh slots always fit
            raise Infeasible(f"task {task.task_id} does not fit fresh slots of {target.instance_id}")
        target.placements.append(placed)

    return PrimaryMap(allocated, deadline, vm_time_limit, job.job_id,
                      {t.task_id: t for t in job.tasks})
