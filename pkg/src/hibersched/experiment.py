"""Deadline search and the policy x scenario comparison matrix."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .backup import BackupMap, schedule_backup
from .catalog import Catalog
from .errors import Infeasible
from .model import Market
from .primary import PrimaryMap, schedule_primary
from .scenarios import Scenario, build_scenario_suite
from .simulator import Policy, SimulationReport, simulate
from .workload import Job

DEFAULT_VM_TIME_LIMIT = 0.5
DEFAULT_DEADLINE_CAP_HOURS = 500


def plan(job: Job, catalog: Catalog, deadline: int, vm_time_limit: float = DEFAULT_VM_TIME_LIMIT,
         market=None) -> tuple[PrimaryMap, BackupMap]:
    """Primary map followed by its backup map."""
    pq = schedule_primary(job, catalog, deadline, vm_time_limit, market=market)
    return pq, schedule_backup(pq, catalog, deadline)


def is_feasible(job: Job, catalog: Catalog, deadline: int,
                vm_time_limit: float = DEFAULT_VM_TIME_LIMIT) -> bool:
    try:
        plan(job, catalog, deadline, vm_time_limit)
    except Infeasible:
        return False
    return True


def find_min_deadline(job: Job, catalog: Catalog, vm_time_limit: float = DEFAULT_VM_TIME_LIMIT,
                      cap_hours: int = DEFAULT_DEADLINE_CAP_HOURS, step_hours: int = 1) -> int:
    """Smallest deadline on a whole-hour grid for which both maps exist.

    Scans ``D = 1h, 2h, ...`` up to ``cap_hours`` and returns the first
    feasible value in periods.
    """
    b = catalog.billing
    for h in range(step_hours, cap_hours + 1, step_hours):
        D = b.hours(h)
        if is_feasible(job, catalog, D, vm_time_limit):
            return D
    raise Infeasible(f"no feasible deadline up to {cap_hours} h for job {job.job_id}")


@dataclass(frozen=True)
class RunRow:
    scenario: str
    policy: str
    report: SimulationReport

    def fields(self, period_minutes: int) -> dict:
        r = self.report
        return {
            "scenario": self.scenario,
            "policy": self.policy,
            "makespan_periods": r.makespan,
            "makespan_hours": f"{r.makespan * period_minutes / 60:.4f}",
            "deadline_periods": r.deadline,
            "deadline_met": str(r.deadline_met).lower(),
            "cost_usd": f"{r.cost_total:.6f}",
            "spot_usd": f"{r.cost_of(market=Market.SPOT.value):.6f}",
            "on_demand_usd": f"{r.cost_of(market=Market.ON_DEMAND.value):.6f}",
            "backup_usd": f"{r.cost_of(role='backup'):.6f}",
            "storage_usd": f"{r.storage_cost():.6f}",
            "migrations": len(r.migrations),
            "backup_slots": sum(r.backup_slots().values()),
        }


CSV_COLUMNS = ("scenario", "policy", "makespan_periods", "makespan_hours", "deadline_periods",
               "deadline_met", "cost_usd", "spot_usd", "on_demand_usd", "backup_usd",
               "storage_usd", "migrations", "backup_slots")

# evaluation strategies as (label, scenario, policy)
STRATEGIES = (
    ("No Hibernation", "no-hibernation", Policy.HIBERNATION_TOLERANT),
    ("Hibernation", "hibernation", Policy.HIBERNATION_TOLERANT),
    ("Hibernation with Migration", "hibernation-with-migration", Policy.HIBERNATION_TOLERANT),
    ("Immediate Migration", "immediate-migration", Policy.IMMEDIATE_MIGRATION),
    ("On-demand", "no-hibernation", Policy.ON_DEMAND_ONLY),
)


@dataclass
class Comparison:
    job_id: str
    deadline: int
    seed: int
    rows: list[RunRow]
    pq: PrimaryMap
    bq: BackupMap
    od_pq: PrimaryMap

    def get(self, scenario: str, policy) -> SimulationReport:
        policy = Policy(policy).value
        for row in self.rows:
            if row.scenario == scenario and row.policy == policy:
                return row.report
        raise KeyError((scenario, policy))

    def strategy(self, label: str) -> SimulationReport:
        for name, scenario, policy in STRATEGIES:
            if name == label:
                return self.get(scenario, policy)
        raise KeyError(label)


def run_matrix(job: Job, catalog: Catalog, deadline: int, seed: int = 0,
               vm_time_limit: float = DEFAULT_VM_TIME_LIMIT, policies=None,
               scenarios: list[Scenario] | None = None) -> Comparison:
    """Simulate every policy on every scenario.

    ``scenarios`` defaults to the four-scenario suite drawn with ``seed``.
    The on-demand-only policy runs on a primary map rebuilt in the
    on-demand market and therefore ignores hibernation events.
    """
    policies = [Policy(p) for p in (policies if policies is not None else list(Policy))]
    if not policies:
        raise ValueError("empty policy list")
    pq, bq = plan(job, catalog, deadline, vm_time_limit)
    od_pq = schedule_primary(job, catalog, deadline, vm_time_limit, market=Market.ON_DEMAND)
    od_bq = BackupMap(deadline)
    if scenarios is None:
        scenarios = build_scenario_suite(pq, seed, catalog.billing)
    rows = []
    for sc in scenarios:
        for pol in policies:
            if pol is Policy.ON_DEMAND_ONLY:
                rep = simulate(od_pq, od_bq, (), pol, catalog.billing)
            else:
                rep = simulate(pq, bq, sc.events, pol, catalog.billing)
            rows.append(RunRow(sc.name, pol.value, rep))
    return Comparison(job.job_id, deadline, seed, rows, pq, bq, od_pq)


def pct_higher(a: float, b: float) -> float:
    """How much ``a`` exceeds ``b``, in percent of ``b``."""
    return 100.0 * (a - b) / b if b else float("inf")


def summary_lines(cmp: Comparison, period_minutes: int = 1) -> list[str]:
    out = [f"# job={cmp.job_id} seed={cmp.seed} deadline_periods={cmp.deadline} "
           f"period_minutes={period_minutes}"]
    have = {}
    for label, scenario, policy in STRATEGIES:
        try:
            r = cmp.get(scenario, policy)
        except KeyError:
            continue
        have[label] = r
        out.append(f"{label:28s} cost={r.cost_total:10.4f} USD  makespan={r.makespan:6d} periods "
                   f"({r.makespan * period_minutes / 60:.2f} h)  deadline_met={r.deadline_met}")
    pairs = [("Immediate Migration", "Hibernation"), ("On-demand", "No Hibernation"),
             ("Hibernation with Migration", "No Hibernation"), ("Hibernation", "No Hibernation"),
             ("On-demand", "Hibernation with Migration")]
    for a, b in pairs:
        if a in have and b in have:
            out.append(f"cost({a}) vs cost({b}): {pct_higher(have[a].cost_total, have[b].cost_total):+.2f}%")
    return out


def comparison_csv(cmp: Comparison, period_minutes: int = 1) -> str:
    buf = io.StringIO()
    buf.write(f"# job={cmp.job_id} seed={cmp.seed} deadline_periods={cmp.deadline} "
              f"period_minutes={period_minutes}\n")
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in cmp.rows:
        w.writerow(row.fields(period_minutes))
    return buf.getvalue()
