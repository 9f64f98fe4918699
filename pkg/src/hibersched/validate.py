"""Invariant checks over primary and backup maps."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .backup import BackupMap, compute_stbkp, rec_group
from .catalog import BillingConfig
from .errors import InfeasibleBackup
from .model import Market, Role, VmInstance
from .primary import PrimaryMap
from .workload import Job, effective_duration

MEM_EPS = 1e-9


@dataclass
class CheckResult:
    name: str
    ok: bool = True
    details: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.ok = False
        if len(self.details) < 20:
            self.details.append(msg)

    def line(self) -> str:
        head = f"{'PASS' if self.ok else 'FAIL'} {self.name}"
        return head if self.ok else head + ": " + "; ".join(self.details)


def _instance_checks(instances, billing: BillingConfig, res: dict[str, CheckResult]) -> None:
    slot = billing.slot_periods
    for vm in instances:
        vid = vm.instance_id
        if not vm.start_slot < vm.end_slot:
            res["instance-span"].fail(f"{vid}: start_slot {vm.start_slot} >= end_slot {vm.end_slot}")
        if (vm.end_slot - vm.start_slot) % slot:
            res["slot-multiple"].fail(f"{vid}: span {vm.end_slot - vm.start_slot} not a multiple of {slot}")
        for p in vm.placements:
            want = effective_duration(p.task, vm.vm_type)
            if p.end - p.start != want:
                res["placement-duration"].fail(
                    f"{vid}/{p.task_id}: length {p.end - p.start} != effective duration {want}")
            if p.start < vm.boot_end or p.end > vm.end_slot:
                res["within-contracted-slots"].fail(
                    f"{vid}/{p.task_id}: [{p.start},{p.end}) outside [{vm.boot_end},{vm.end_slot})")
            if not 0 <= p.core < vm.vm_type.vcpus:
                res["vcpu-cap"].fail(f"{vid}/{p.task_id}: core {p.core} >= vcpus {vm.vm_type.vcpus}")
        for core, ps in enumerate(vm.cores() if _cores_ok(vm) else []):
            for a, b in zip(ps, ps[1:]):
                if b.start < a.end:
                    res["core-overlap"].fail(
                        f"{vid} core {core}: {a.task_id} and {b.task_id} overlap at period {b.start}")
        for q in sorted({p.start for p in vm.placements}):
            active = [p for p in vm.placements if p.start <= q < p.end]
            used = sum(p.task.memory for p in active)
            if used > vm.vm_type.memory + MEM_EPS:
                res["memory-cap"].fail(f"{vid}: {used:.2f} GB > {vm.vm_type.memory} GB at period {q}")
            if len(active) > vm.vm_type.vcpus:
                res["vcpu-cap"].fail(f"{vid}: {len(active)} tasks > {vm.vm_type.vcpus} vcpus at period {q}")


def _cores_ok(vm: VmInstance) -> bool:
    return all(0 <= p.core < vm.vm_type.vcpus for p in vm.placements)


def check_primary(pq: PrimaryMap, job: Job | None = None,
                  billing: BillingConfig | None = None) -> list[CheckResult]:
    billing = billing or BillingConfig()
    names = ["instance-span", "slot-multiple", "placement-duration", "within-contracted-slots",
             "core-overlap", "memory-cap", "vcpu-cap", "occupation-limit", "market-rule",
             "completeness"]
    res = {n: CheckResult(n) for n in names}
    _instance_checks(pq.instances, billing, res)
    limit = pq.limit
    for vm in pq.instances:
        if vm.role is not Role.PRIMARY:
            res["market-rule"].fail(f"{vm.instance_id}: role {vm.role.value} in primary map")
        if vm.last_end is not None and vm.last_end > limit:
            res["occupation-limit"].fail(f"{vm.instance_id}: last task ends at {vm.last_end} > {limit}")
        t = vm.vm_type
        if vm.market is Market.SPOT and not (t.hibernation_capable and t.spot_price < t.od_price):
            res["market-rule"].fail(f"{vm.instance_id}: spot {t.name} violates the market rule")
    counts = Counter(p.task_id for vm in pq.instances for p in vm.placements)
    for tid, c in sorted(counts.items()):
        if c != 1:
            res["completeness"].fail(f"task {tid} placed {c} times")
    if job is not None:
        expected = {t.task_id for t in job.tasks}
        for tid in sorted(expected - set(counts)):
            res["completeness"].fail(f"task {tid} not placed")
        for tid in sorted(set(counts) - expected):
            res["completeness"].fail(f"unknown task {tid} placed")
        for vm in pq.instances:
            for p in vm.placements:
                if p.task_id in expected and p.task != job.task(p.task_id):
                    res["completeness"].fail(f"task {p.task_id} differs from the job description")
    return [res[n] for n in names]


def check_backup(pq: PrimaryMap, bq: BackupMap,
                 billing: BillingConfig | None = None) -> list[CheckResult]:
    billing = billing or BillingConfig()
    names = ["backup-on-demand", "backup-deadline", "group-coverage", "rec-group-definition",
             "backup-placement", "stbkp-identity", "start-bkp-window", "distinct-instances"]
    res = {n: CheckResult(n) for n in names}
    D = pq.deadline
    if bq.deadline != D:
        res["backup-deadline"].fail(f"backup map deadline {bq.deadline} != primary deadline {D}")

    lookup = {}
    for g in bq.groups:
        key = (g.source_instance, g.anchor_task)
        if key in lookup:
            res["group-coverage"].fail(f"duplicate group {key}")
        lookup[key] = g
    for vm in pq.spot_instances():
        for p in vm.placements:
            if (vm.instance_id, p.task_id) not in lookup:
                res["group-coverage"].fail(f"no recovery group for {vm.instance_id}/{p.task_id}")

    placement_res = {n: CheckResult(n) for n in
                     ["instance-span", "slot-multiple", "placement-duration",
                      "within-contracted-slots", "core-overlap", "memory-cap", "vcpu-cap"]}
    _instance_checks(bq.instances, billing, placement_res)
    for r in placement_res.values():
        for d in r.details:
            res["backup-placement"].fail(f"{r.name}: {d}")
        if not r.ok and not r.details:
            res["backup-placement"].fail(r.name)

    primary_ids = {vm.instance_id for vm in pq.instances}
    seen_backup_ids = Counter(vm.instance_id for vm in bq.instances)
    for vid, c in seen_backup_ids.items():
        if vid in primary_ids:
            res["distinct-instances"].fail(f"backup instance id {vid} reuses a primary id")
        if c > 1:
            res["distinct-instances"].fail(f"backup instance id {vid} appears in {c} groups")

    for g in bq.groups:
        gid = f"{g.source_instance}/{g.anchor_task}"
        for vm in g.backup_instances:
            if vm.market is not Market.ON_DEMAND or vm.role is not Role.BACKUP:
                res["backup-on-demand"].fail(f"{gid}: {vm.instance_id} is {vm.market.value}/{vm.role.value}")
        try:
            src = pq.instance(g.source_instance)
        except KeyError:
            res["group-coverage"].fail(f"{gid}: unknown source instance")
            continue
        if src.market is not Market.SPOT:
            res["group-coverage"].fail(f"{gid}: source instance is not spot")
        if not src.has_task(g.anchor_task):
            res["group-coverage"].fail(f"{gid}: anchor not on source instance")
            continue
        expect = rec_group(g.anchor_task, src)
        if set(g.members) != expect:
            res["rec-group-definition"].fail(
                f"{gid}: members {sorted(g.members)} != recomputed {sorted(expect)}")
        placed = Counter(p.task_id for vm in g.backup_instances for p in vm.placements)
        for m in sorted(g.members):
            if placed.get(m, 0) != 1:
                res["group-coverage"].fail(f"{gid}: member {m} has {placed.get(m, 0)} backup placements")
        ends = [p.end for vm in g.backup_instances for p in vm.placements if p.task_id in g.members]
        rt = max(ends, default=0)
        if rt != g.runtime:
            res["stbkp-identity"].fail(f"{gid}: stored runtime {g.runtime} != recomputed {rt}")
        try:
            st = compute_stbkp(rt, D)
        except InfeasibleBackup:
            res["start-bkp-window"].fail(f"{gid}: runtime {rt} does not fit before D={D}")
            continue
        if g.start_bkp != st or g.start_bkp + g.runtime + 1 != D:
            res["stbkp-identity"].fail(
                f"{gid}: start_bkp {g.start_bkp} + runtime {g.runtime} + 1 != D={D} (expected {st})")
        end_ti = src.placement_of(g.anchor_task).end
        if g.start_bkp < 0 or end_ti + g.runtime >= D:
            res["start-bkp-window"].fail(
                f"{gid}: anchor ends at {end_ti}, runtime {g.runtime}, D={D}")
    return [res[n] for n in names]


def all_ok(results) -> bool:
    return all(r.ok for r in results)
