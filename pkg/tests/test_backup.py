import random

import pytest

from hibersched.backup import (compute_stbkp, get_best_vm, parallel_set, rec_group, runtime,
                               schedule_backup, succ_set)
from hibersched.catalog import VmType
from hibersched.errors import InfeasibleBackup
from hibersched.model import Market, Placement, Role, VmInstance
from hibersched.primary import schedule_primary
from hibersched.scenarios import REFERENCE_JOBS, synthesize_job
from hibersched.validate import all_ok, check_backup
from hibersched.workload import TaskSpec

from conftest import random_small_job


def layout(rows, ncores=4):
    """rows: list of (task_id, core, start, end)."""
    vt = VmType("v", ncores, 64.0, 1.0, 0.3, 1.0)
    ps = [Placement(TaskSpec(t, e - s, 1.0), c, s, e) for t, c, s, e in rows]
    return VmInstance("vm", vt, Market.SPOT, 0, 600, Role.PRIMARY, ps)


# two-core figure-style layout
FIG = layout([("a", 0, 2, 30), ("b", 0, 30, 50), ("c", 0, 50, 80),
              ("d", 1, 2, 20), ("e", 1, 20, 45), ("f", 1, 45, 70)], 2)


def test_succ_examples():
    assert succ_set("c", FIG) == {"c"}
    assert succ_set("a", FIG) == {"a", "b", "c"}
    assert succ_set("e", FIG) == {"e", "f"}


def test_parallel_examples():
    assert parallel_set("a", layout([("a", 0, 0, 10), ("b", 0, 10, 20)], 1)) == set()
    v = layout([("a", 0, 0, 10), ("b", 1, 0, 10)], 2)
    assert parallel_set("a", v) == {"b"} and parallel_set("b", v) == {"a"}
    assert parallel_set("b", FIG) == {"e", "f"}


def test_rec_group_examples():
    assert rec_group("b", FIG) == {"b", "c", "e", "f"}
    assert rec_group("x", layout([("x", 0, 0, 5)], 1)) == {"x"}


def oracle_rec_group(tid, rows):
    byid = {t: (c, s, e) for t, c, s, e in rows}
    c0, s0, e0 = byid[tid]
    group = {tid} | {t for t, (c, s, e) in byid.items() if t != tid and s < e0 and s0 < e}
    out = set()
    for g in group:
        cg, _, eg = byid[g]
        out |= {g} | {t for t, (c, s, _) in byid.items() if c == cg and s >= eg}
    return out


def random_layout(rnd):
    ncores = rnd.randint(1, 4)
    n = rnd.randint(1, 12)
    rows = []
    ends = [rnd.randint(0, 5) for _ in range(ncores)]
    for i in range(n):
        c = rnd.randrange(ncores)
        s = ends[c] + rnd.choice([0, 0, rnd.randint(1, 10)])
        e = s + rnd.randint(1, 30)
        ends[c] = e
        rows.append((f"t{i}", c, s, e))
    return rows, ncores


def test_rec_group_random_oracle():
    rnd = random.Random(3)
    for _ in range(300):
        rows, nc = random_layout(rnd)
        vm = layout(rows, nc)
        for t, *_ in rows:
            assert rec_group(t, vm) == oracle_rec_group(t, rows)


def test_runtime_examples():
    vt = VmType("b", 2, 8.0, 0.1, 0.03, 1.0)
    one = VmInstance("b0", vt, Market.ON_DEMAND, 0, 120, Role.BACKUP,
                     [Placement(TaskSpec("a", 100, 1.0), 0, 2, 102)])
    assert runtime({"a"}, [one]) == 102
    two = [VmInstance(f"b{i}", vt, Market.ON_DEMAND, 0, 120, Role.BACKUP,
                      [Placement(TaskSpec(f"t{i}", 50, 1.0), 0, 2, 52)]) for i in range(2)]
    assert runtime({"t0", "t1"}, two) == 52
    with pytest.raises(ValueError):
        runtime({"zz"}, two)


def test_stbkp_examples():
    assert compute_stbkp(300, 1020) == 719
    assert compute_stbkp(1019, 1020) == 0
    with pytest.raises(InfeasibleBackup):
        compute_stbkp(1020, 1020)


def test_get_best_vm_examples(catalog):
    b = catalog.billing
    assert get_best_vm(TaskSpec("tiny", 5, 1.0), catalog.types, 1000, 0, b).name == "c3.large"
    assert get_best_vm(TaskSpec("m5", 5, 5.0), catalog.types, 1000, 0, b).name == "m4.large"
    assert get_best_vm(TaskSpec("late", 50, 1.0), catalog.types, 100, 99, b) is None


def test_get_best_vm_exhaustive(catalog):
    b = catalog.billing
    for base in (5, 59, 200, 900):
        for mem in (1.0, 5.0, 20.0):
            t = TaskSpec("a", base, mem)
            got = get_best_vm(t, catalog.types, 10_000, 0, b)
            costs = []
            for v in catalog.types:
                if v.memory >= mem:
                    d = max(1, -(-base * v.slowdown // 1))
                    costs.append((v.od_price * -(-(d) // 60), v.name))
            assert (got.od_price * -(-max(1, -(-base * got.slowdown // 1)) // 60), got.name) == min(costs)


def test_no_spot_no_backups(catalog):
    job = random_small_job(2)
    pq = schedule_primary(job, catalog, 3000, 0.5, market=Market.ON_DEMAND)
    assert schedule_backup(pq, catalog).groups == []


def test_j207_backups_on_demand(catalog):
    st_ = REFERENCE_JOBS["J207"]
    job = synthesize_job(st_, 0, "J207", catalog.billing)
    pq = schedule_primary(job, catalog, 1020, 0.5)
    bq = schedule_backup(pq, catalog)
    assert bq.instances and all(vm.market is Market.ON_DEMAND for vm in bq.instances)
    assert all_ok(check_backup(pq, bq, catalog.billing))


@pytest.mark.parametrize("seed", range(10))
def test_random_backup_maps(catalog, seed):
    job = random_small_job(seed)
    pq = schedule_primary(job, catalog, 1500, 0.5)
    bq = schedule_backup(pq, catalog)
    res = check_backup(pq, bq, catalog.billing)
    assert all_ok(res), [r.line() for r in res if not r.ok]
    for g in bq.groups:
        assert g.start_bkp + 1 + g.runtime <= bq.deadline
        # critical path oracle over the backup placements
        assert g.runtime == max(p.end for vm in g.backup_instances for p in vm.placements)
        assert g.members == frozenset(rec_group(g.anchor_task, pq.instance(g.source_instance)))
