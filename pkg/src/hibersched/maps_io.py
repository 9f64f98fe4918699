"""JSON documents for primary maps, backup maps and event lists."""

from __future__ import annotations

import json
from pathlib import Path

from .backup import BackupMap, RecoveryGroup
from .catalog import VmType
from .errors import ParseError
from .model import Market, Placement, Role, VmInstance
from .primary import PrimaryMap
from .simulator import HibernationEvent
from .workload import TaskSpec

FORMAT_VERSION = 1


def _instance_doc(vm: VmInstance) -> dict:
    return {
        "instance_id": vm.instance_id,
        "vm_type": vm.vm_type.to_dict(),
        "market": vm.market.value,
        "role": vm.role.value,
        "start_slot": vm.start_slot,
        "end_slot": vm.end_slot,
        "placements": [
            {"task_id": p.task_id, "core": p.core, "start": p.start, "end": p.end,
             "memory_gb": p.task.memory, "base_duration_periods": p.task.base_duration}
            for p in sorted(vm.placements, key=lambda q: (q.start, q.core, q.task_id))
        ],
    }


def _instance_from(d: dict) -> VmInstance:
    try:
        vm = VmInstance(
            instance_id=str(d["instance_id"]),
            vm_type=VmType.from_dict(d["vm_type"]),
            market=Market(d["market"]),
            start_slot=int(d["start_slot"]),
            end_slot=int(d["end_slot"]),
            role=Role(d.get("role", "primary")),
        )
        for p in d.get("placements", []):
            task = TaskSpec(str(p["task_id"]), int(p["base_duration_periods"]), float(p["memory_gb"]))
            vm.placements.append(Placement(task, int(p["core"]), int(p["start"]), int(p["end"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad instance record: {exc!r}") from exc
    return vm


def primary_to_doc(pq: PrimaryMap, meta: dict | None = None) -> dict:
    return {
        "kind": "primary_map",
        "format_version": FORMAT_VERSION,
        "job_id": pq.job_id,
        "deadline_periods": pq.deadline,
        "vm_time_limit": pq.vm_time_limit,
        "meta": meta or {},
        "instances": [_instance_doc(vm) for vm in pq.instances],
    }


def primary_from_doc(doc: dict) -> PrimaryMap:
    if doc.get("kind") != "primary_map":
        raise ParseError("document is not a primary_map")
    try:
        instances = [_instance_from(d) for d in doc["instances"]]
        pq = PrimaryMap(instances, int(doc["deadline_periods"]), float(doc["vm_time_limit"]),
                        str(doc.get("job_id", "")))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad primary map: {exc!r}") from exc
    pq.tasks = {p.task_id: p.task for vm in instances for p in vm.placements}
    return pq


def backup_to_doc(bq: BackupMap, meta: dict | None = None) -> dict:
    return {
        "kind": "backup_map",
        "format_version": FORMAT_VERSION,
        "deadline_periods": bq.deadline,
        "meta": meta or {},
        "groups": [
            {
                "source_instance": g.source_instance,
                "anchor_task": g.anchor_task,
                "members": sorted(g.members),
                "runtime": g.runtime,
                "start_bkp": g.start_bkp,
                "instances": [_instance_doc(vm) for vm in g.backup_instances],
            }
            for g in bq.groups
        ],
    }


def backup_from_doc(doc: dict) -> BackupMap:
    if doc.get("kind") != "backup_map":
        raise ParseError("document is not a backup_map")
    try:
        bq = BackupMap(int(doc["deadline_periods"]))
        for g in doc["groups"]:
            bq.groups.append(RecoveryGroup(
                anchor_task=str(g["anchor_task"]),
                source_instance=str(g["source_instance"]),
                members=frozenset(str(m) for m in g["members"]),
                backup_instances=[_instance_from(d) for d in g["instances"]],
                runtime=int(g["runtime"]),
                start_bkp=int(g["start_bkp"]),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad backup map: {exc!r}") from exc
    return bq


def events_to_doc(events) -> dict:
    return {"kind": "hibernation_events", "events": [e.to_dict() for e in events]}


def events_from_doc(doc: dict) -> list[HibernationEvent]:
    if doc.get("kind") != "hibernation_events":
        raise ParseError("document is not a hibernation_events list")
    try:
        return [HibernationEvent.from_dict(e) for e in doc["events"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad event record: {exc!r}") from exc


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_primary(path) -> PrimaryMap:
    return primary_from_doc(read_json(path))


def load_backup(path) -> BackupMap:
    return backup_from_doc(read_json(path))


def load_events(path) -> list[HibernationEvent]:
    return events_from_doc(read_json(path))
