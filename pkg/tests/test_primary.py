import pytest
from hypothesis import given, settings, strategies as st

from hibersched.catalog import BillingConfig, Catalog, VmType
from hibersched.errors import Infeasible, NoFeasibleVm
from hibersched.model import Market, Placement, Role, VmInstance
from hibersched.primary import (best_vm, check_insertion, occupation_limit, schedule_primary,
                                waste)
from hibersched.scenarios import REFERENCE_JOBS, synthesize_job
from hibersched.validate import all_ok, check_primary
from hibersched.workload import TaskSpec, make_job

from conftest import random_small_job

TWO_CORE = VmType("two", 2, 8.0, 1.0, 0.3, 1.0, boot_time=0)


def _vm(end_slot=120, placements=(), vtype=TWO_CORE):
    return VmInstance("vm", vtype, Market.SPOT, 0, end_slot, Role.PRIMARY, list(placements))


def test_waste_examples():
    t = TaskSpec("a", 100, 1.0)
    assert waste(_vm(120, [Placement(t, 0, 0, 100)])) == 20
    assert waste(_vm(100, [Placement(t, 0, 0, 100)])) == 0
    assert waste(_vm(60)) == 60


def _brute_insert(task, vm, limit):
    dur = task.base_duration
    for s in range(vm.boot_end, min(vm.end_slot, limit) - dur + 1):
        for c in range(vm.vm_type.vcpus):
            win = [q for q in vm.placements if q.start < s + dur and q.end > s]
            if any(q.core == c for q in win):
                continue
            if all(vm.memory_in_use(x) + task.memory <= vm.vm_type.memory for x in range(s, s + dur)):
                return c, s
    return None


def test_insertion_into_waste():
    a = TaskSpec("a", 90, 4.0)
    b = TaskSpec("b", 100, 4.0)
    vm = _vm(120, [Placement(a, 0, 0, 90), Placement(b, 1, 0, 100)])
    t = TaskSpec("t", 20, 4.0)
    pl = check_insertion(t, vm, 1000)
    assert (pl.core, pl.start) == _brute_insert(t, vm, 1000) == (0, 90)


def test_insertion_rejected():
    a = TaskSpec("a", 90, 6.0)
    vm = _vm(120, [Placement(a, 0, 0, 90)])
    assert check_insertion(TaskSpec("t", 20, 4.0), vm, 1000).start == 90
    assert check_insertion(TaskSpec("t", 100, 4.0), vm, 1000) is None
    # would end at limit + 1
    assert check_insertion(TaskSpec("t", 21, 1.0), vm, 110) is not None
    assert check_insertion(TaskSpec("t", 21, 1.0), _vm(120, [Placement(a, 0, 0, 90)]), 20) is None
    assert check_insertion(TaskSpec("t", 21, 1.0), _vm(), 20) is None
    assert check_insertion(TaskSpec("t", 20, 1.0), _vm(), 20) is not None


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 80), st.integers(1, 40),
                          st.integers(1, 6)), max_size=5),
       st.integers(1, 60), st.integers(1, 6), st.integers(30, 130))
def test_insertion_matches_brute_force(raw, dur, mem, limit):
    placements = []
    for i, (core, start, d, m) in enumerate(raw):
        p = Placement(TaskSpec(f"p{i}", d, float(m)), core, start, start + d)
        if all(not (q.core == core and q.overlaps(p)) for q in placements):
            placements.append(p)
    vm = _vm(120, placements)
    t = TaskSpec("t", dur, float(mem))
    got = check_insertion(t, vm, limit)
    want = _brute_insert(t, vm, limit)
    assert (None if got is None else (got.core, got.start)) == want


def test_best_vm_examples(catalog):
    big = TaskSpec("a", 600, 1.0)
    assert best_vm(big, catalog.types).name == "c3.8xlarge"
    assert best_vm(TaskSpec("m", 600, 61.0), catalog.types).name == "m4.4xlarge"
    with pytest.raises(NoFeasibleVm):
        best_vm(TaskSpec("x", 10, 100.0), catalog.types)


def test_best_vm_exhaustive(catalog):
    for base in (1, 7, 60, 600, 3000):
        for mem in (1.0, 5.0, 20.0, 40.0):
            t = TaskSpec("a", base, mem)
            ok = [v for v in catalog.types if v.memory >= mem]
            fastest = min(max(1, -(-base * v.slowdown // 1)) for v in ok)
            pick = best_vm(t, catalog.types)
            assert max(1, -(-base * pick.slowdown // 1)) == fastest


def test_occupation_limit():
    assert occupation_limit(1020, 0.5) == 510
    assert occupation_limit(1021, 0.5) == 510


def test_single_task_is_spot(catalog):
    pq = schedule_primary(make_job("one", [("a", 100, 1.0)]), catalog, 10_000, 0.5)
    assert len(pq.instances) == 1
    assert pq.instances[0].market is Market.SPOT
    assert all_ok(check_primary(pq))


def test_forced_on_demand(catalog):
    job = random_small_job(1)
    pq = schedule_primary(job, catalog, 2000, 0.5, market=Market.ON_DEMAND)
    assert all(vm.market is Market.ON_DEMAND for vm in pq.instances)


def test_fig3_style_layout():
    # 9 small tasks, memory forcing idle gaps on a 2-core instance
    vt = VmType("two", 2, 4.0, 1.0, 0.3, 1.0, boot_time=0)
    cat = Catalog((vt,), BillingConfig())
    rows = [("t0", 16, 2.5), ("t1", 4, 1.0), ("t2", 16, 3.0), ("t3", 30, 0.5), ("t4", 18, 0.5),
            ("t5", 39, 1.0), ("t6", 25, 1.5), ("t7", 29, 1.5), ("t8", 35, 3.5)]
    pq = schedule_primary(make_job("fig3", rows), cat, 240, 0.5)
    assert len(pq.instances) == 1
    vm = pq.instances[0]
    assert all_ok(check_primary(pq))
    gaps = 0
    for core in vm.cores():
        t = 0
        for p in core:
            gaps += p.start > t
            t = p.end
    assert gaps >= 2
    assert vm.waste() > 0


def test_infeasible_limit(catalog):
    job = make_job("long", [("a", 6000, 1.0)])
    with pytest.raises(Infeasible):
        schedule_primary(job, catalog, 1000, 0.5)


def test_j207_feasible_at_table_deadline(catalog):
    st_ = REFERENCE_JOBS["J207"]
    job = synthesize_job(st_, 0, "J207", catalog.billing)
    pq = schedule_primary(job, catalog, catalog.billing.hours(st_.deadline_hours), 0.5)
    assert all_ok(check_primary(pq, job, catalog.billing))
    assert {vm.vm_type.name for vm in pq.instances} <= {"c3.8xlarge", "c4.8xlarge", "c3.4xlarge",
                                                        "c4.4xlarge"}


@pytest.mark.parametrize("seed", range(15))
def test_invariants_random_jobs(catalog, seed):
    job = random_small_job(seed, n_max=30, dur=(5, 3000), mem=(0.5, 40))
    pq = schedule_primary(job, catalog, 3000, 0.5)
    results = check_primary(pq, job, catalog.billing)
    assert all_ok(results), [r.line() for r in results if not r.ok]


def test_extension_prefers_min_waste(tiny_catalog):
    # tasks fitting only on "fast"; the second instance should be extended rather than a third opened
    job = make_job("ext", [(f"t{i}", 100, 5.0) for i in range(4)])
    pq = schedule_primary(job, tiny_catalog, 1000, 0.5)
    assert all_ok(check_primary(pq, job, tiny_catalog.billing))
    assert len(pq.instances) <= 4
