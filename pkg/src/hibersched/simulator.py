"""Event-driven replay of primary/backup maps under spot hibernation.

Each spot instance processes its hibernation events in time order. While an
instance is hibernated none of its work progresses; on resumption the
unfinished part of its queue continues in place, shifted by the pause. If
the pause outlasts the tolerance window of the recovery groups that were
running (or next in line) when it began, the unfinished tasks are cancelled
on the spot instance and their backups are launched on the on-demand
instances of the backup map.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

from .backup import BackupMap, RecoveryGroup
from .catalog import BillingConfig, number_of_slots
from .errors import ScenarioError
from .model import Market, Placement, Role, VmInstance
from .primary import PrimaryMap

logger = logging.getLogger(__name__)

HOURS_PER_MONTH = 720


class Policy(str, Enum):
    HIBERNATION_TOLERANT = "hibernation-tolerant"
    IMMEDIATE_MIGRATION = "immediate-migration"
    ON_DEMAND_ONLY = "on-demand-only"
    NO_HIBERNATION_ORACLE = "no-hibernation"


@dataclass(frozen=True)
class HibernationEvent:
    instance_id: str
    start: int
    duration: int | None = None  # None: never resumes

    def __post_init__(self):
        if self.start < 0:
            raise ScenarioError(f"hibernation of {self.instance_id} starts before period 0")
        if self.duration is not None and self.duration < 1:
            raise ScenarioError(f"hibernation of {self.instance_id} must last >= 1 period")

    @property
    def end(self) -> float:
        return float("inf") if self.duration is None else self.start + self.duration

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "HibernationEvent":
        dur = d.get("duration")
        return cls(str(d["instance_id"]), int(d["start"]), None if dur is None else int(dur))


@dataclass(frozen=True)
class Execution:
    task_id: str
    instance_id: str
    kind: str
    start: int
    end: int
    completed: bool


@dataclass(frozen=True)
class InstanceCharge:
    instance_id: str
    vm_type: str
    market: str
    role: str
    slots: int
    running_periods: int
    hibernated_periods: int
    running_charge: float
    storage_charge: float

    @property
    def total(self) -> float:
        return self.running_charge + self.storage_charge


@dataclass(frozen=True)
class Migration:
    instance_id: str
    hibernation_start: int
    launch_period: int
    anchors: tuple[str, ...]


@dataclass
class SimulationReport:
    policy: str
    deadline: int
    makespan: int
    deadline_met: bool
    cost_total: float
    cost_breakdown: list[InstanceCharge] = field(default_factory=list)
    migrations: list[Migration] = field(default_factory=list)
    events_applied: list[dict] = field(default_factory=list)
    executions: list[Execution] = field(default_factory=list)

    def cost_of(self, market: str | None = None, role: str | None = None) -> float:
        return sum(c.total for c in self.cost_breakdown
                   if (market is None or c.market == market) and (role is None or c.role == role))

    def storage_cost(self) -> float:
        return sum(c.storage_charge for c in self.cost_breakdown)

    def backup_slots(self) -> dict[str, int]:
        return {c.instance_id: c.slots for c in self.cost_breakdown if c.role == Role.BACKUP.value}

    def to_dict(self) -> dict:
        d = asdict(self)
        for c, src in zip(d["cost_breakdown"], self.cost_breakdown):
            c["total"] = src.total
        return d


def charge(instance: VmInstance, running_periods: int, hibernated_periods: int,
           storage_gb: float, billing: BillingConfig) -> InstanceCharge:
    """Itemised charge for one instance.

    On-demand instances pay every opened slot of ``running_periods``. Spot
    instances pay the slots they actually ran plus storage for the
    hibernated time (a month is 720 hours).
    """
    if running_periods < 0 or hibernated_periods < 0:
        raise ValueError("periods must be non-negative")
    slots = number_of_slots(running_periods, billing)
    t = instance.vm_type
    if instance.market is Market.ON_DEMAND:
        running = t.od_price * slots
        storage = 0.0
    else:
        running = t.spot_price * slots
        months = hibernated_periods * billing.period_minutes / (HOURS_PER_MONTH * 60.0)
        storage = billing.storage_price * storage_gb * months
    return InstanceCharge(instance.instance_id, t.name, instance.market.value, instance.role.value,
                          slots, running_periods, hibernated_periods, running, storage)


def bill(instance: VmInstance, running_periods: int, hibernated_periods: int,
         storage_gb: float, billing: BillingConfig) -> float:
    return charge(instance, running_periods, hibernated_periods, storage_gb, billing).total


def _trigger_anchors(runs: dict[str, list[int]], cores: dict[str, int], p: int) -> list[str]:
    """Tasks whose recovery groups guard a hibernation starting at ``p``.

    These are the tasks executing at ``p`` plus, for every core idle at
    ``p``, its next pending task.
    """
    executing = [t for t, (s, e) in runs.items() if s <= p < e]
    busy = {cores[t] for t in executing}
    nxt: dict[int, tuple[int, str]] = {}
    for t, (s, _) in runs.items():
        c = cores[t]
        if c in busy or s <= p:
            continue
        if c not in nxt or (s, t) < nxt[c]:
            nxt[c] = (s, t)
    anchors = executing + [t for _, t in nxt.values()]
    return sorted(anchors, key=lambda t: (runs[t][0], t))


def _group_for(bq: BackupMap, instance_id: str, anchor: str) -> RecoveryGroup:
    try:
        return bq.group(instance_id, anchor)
    except KeyError:
        raise ScenarioError(f"backup map has no recovery group for {instance_id}/{anchor}") from None


def simulate(pq: PrimaryMap, bq: BackupMap, events, policy, billing: BillingConfig,
             storage_gb: dict[str, float] | None = None) -> SimulationReport:
    """Replay ``pq``/``bq`` under ``events`` with the given policy.

    Raises
    ------
    ScenarioError
        An event names an unknown or on-demand instance, or the policy is
        incompatible with the maps.
    """
    policy = Policy(policy)
    D = pq.deadline
    events = list(events)
    if policy is Policy.ON_DEMAND_ONLY:
        if pq.spot_instances():
            raise ScenarioError("on-demand-only policy needs a primary map without spot instances")
        events = []
    elif policy is Policy.NO_HIBERNATION_ORACLE:
        events = []

    known = {vm.instance_id: vm for vm in pq.instances}
    per_vm: dict[str, list[HibernationEvent]] = {}
    for ev in events:
        vm = known.get(ev.instance_id)
        if vm is None:
            raise ScenarioError(f"hibernation event on unknown instance {ev.instance_id!r}")
        if vm.market is not Market.SPOT:
            raise ScenarioError(f"instance {ev.instance_id} is on-demand and cannot hibernate")
        per_vm.setdefault(ev.instance_id, []).append(ev)

    executions: list[Execution] = []
    charges: list[InstanceCharge] = []
    migrations: list[Migration] = []
    applied: list[dict] = []
    launches: list[tuple[VmInstance, int, list[Placement]]] = []

    for vm in sorted(pq.instances, key=lambda v: v.instance_id):
        runs = {p.task_id: [p.start, p.end] for p in vm.placements}
        cores = {p.task_id: p.core for p in vm.placements}
        hibernated = 0
        launch = None
        for ev in sorted(per_vm.get(vm.instance_id, []), key=lambda e: (e.start, e.end)):
            p = ev.start
            record = {"instance_id": vm.instance_id, "start": p, "duration": ev.duration}
            if launch is not None:
                applied.append({**record, "outcome": "ignored: instance terminated"})
                continue
            unfinished = sorted(t for t, (_, e) in runs.items() if e > p)
            if not unfinished:
                applied.append({**record, "outcome": "ignored: no pending work"})
                continue
            anchors = _trigger_anchors({t: runs[t] for t in unfinished}, cores, p)
            groups = [_group_for(bq, vm.instance_id, a) for a in anchors]
            remaining_end = max(runs[t][1] for t in unfinished)
            # latest resume that still lets the shifted queue finish in place
            in_place_limit = D - (remaining_end - p)
            trigger = min(min(g.start_bkp for g in groups), in_place_limit)

            if policy is Policy.IMMEDIATE_MIGRATION:
                at = p
            elif ev.end <= trigger:
                h = ev.duration
                for t in unfinished:
                    s, e = runs[t]
                    runs[t] = [s + h if s >= p else s, e + h]
                hibernated += h
                applied.append({**record, "outcome": "resumed", "trigger": trigger})
                continue
            else:
                at = max(trigger + 1, p)

            hibernated += at - p
            for t in unfinished:
                s, _ = runs.pop(t)
                if s < p:
                    executions.append(Execution(t, vm.instance_id, "primary", s, p, False))
            need = set(unfinished)
            # the tightest group owns its members: its backups are timed to end at D
            for g in sorted(groups, key=lambda g: (g.start_bkp, g.anchor_task)):
                for bvm in g.backup_instances:
                    todo = [pl for pl in bvm.placements if pl.task_id in need]
                    if todo:
                        need -= {pl.task_id for pl in todo}
                        launches.append((bvm, at, todo))
            if need:  # pragma: no cover - guarded by the recovery-group construction
                raise RuntimeError(f"tasks {sorted(need)} of {vm.instance_id} have no backup")
            migrations.append(Migration(vm.instance_id, p, at, tuple(anchors)))
            applied.append({**record, "outcome": "migrated", "trigger": trigger, "launch": at})
            launch = at
            logger.debug("migrating %s at %d (hibernated at %d)", vm.instance_id, at, p)

        for t, (s, e) in sorted(runs.items(), key=lambda kv: (kv[1][0], kv[0])):
            executions.append(Execution(t, vm.instance_id, "primary", s, e, True))
        if launch is not None:
            release = launch
        else:
            release = max((e for _, e in runs.values()), default=vm.start_slot)
        span = release - vm.start_slot
        if vm.market is Market.ON_DEMAND:
            running = max(span, vm.end_slot - vm.start_slot)
        else:
            running = span - hibernated
        gb = (storage_gb or {}).get(vm.instance_id, vm.vm_type.memory)
        charges.append(charge(vm, running, hibernated, gb, billing))

    for bvm, at, todo in launches:
        for pl in sorted(todo, key=lambda q: (q.start, q.core)):
            executions.append(Execution(pl.task_id, bvm.instance_id, "backup",
                                        at + pl.start, at + pl.end, True))
        charges.append(charge(bvm, max(pl.end for pl in todo), 0, 0.0, billing))

    makespan = max((x.end for x in executions if x.completed), default=0)
    total = sum(c.total for c in charges)
    return SimulationReport(policy.value, D, makespan, makespan <= D, total,
                            charges, migrations, applied, executions)
