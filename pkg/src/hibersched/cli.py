"""Command-line entry point: ``hibersched <subcommand>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .backup import BackupMap
from .catalog import load_catalog
from .errors import (HiberschedError, Infeasible, ParseError, ScenarioError, StatsError,
                     ValidationError)
from .experiment import (DEFAULT_VM_TIME_LIMIT, comparison_csv, find_min_deadline, plan,
                         run_matrix, summary_lines)
from .maps_io import (backup_to_doc, events_to_doc, load_backup, load_events, load_primary,
                      primary_to_doc, write_json)
from .price_trace import derive_hibernation_events, first_day_average, load_price_history
from .scenarios import REFERENCE_JOBS, JobStats, Scenario, build_scenario_suite, synthesize_job
from .simulator import Policy, simulate
from .validate import check_backup, check_primary
from .workload import dump_job, load_job

log = logging.getLogger("hibersched")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_INVARIANT = 6
EXIT_SCENARIO = 7

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _stats(text: str) -> JobStats:
    if text in REFERENCE_JOBS:
        return REFERENCE_JOBS[text]
    parts = text.split(",")
    if len(parts) != 5:
        raise UsageError("--synth expects COUNT,MIN_H,AVG_H,MAX_H,MEM_GB or a job name "
                         f"({', '.join(REFERENCE_JOBS)})")
    try:
        return JobStats(int(parts[0]), *(float(p) for p in parts[1:]))
    except ValueError:
        raise UsageError(f"bad --synth value {text!r}") from None


def _job(args, catalog):
    if bool(args.job) == bool(args.synth):
        raise UsageError("give exactly one of --job or --synth")
    if args.job:
        return load_job(args.job)
    stats = _stats(args.synth)
    name = args.synth if args.synth in REFERENCE_JOBS else "synth"
    return synthesize_job(stats, args.seed, name, catalog.billing)


def _deadline(args, job, catalog) -> int:
    if args.deadline in (None, "auto"):
        if args.deadline is None and getattr(args, "synth", None) in REFERENCE_JOBS:
            return catalog.billing.hours(REFERENCE_JOBS[args.synth].deadline_hours)
        return find_min_deadline(job, catalog, args.vm_time_limit)
    try:
        hours = float(args.deadline)
    except ValueError:
        raise UsageError(f"--deadline must be hours or 'auto', got {args.deadline!r}") from None
    return catalog.billing.hours(hours)


def _meta(args, catalog, deadline) -> dict:
    b = catalog.billing
    return {"seed": args.seed, "period_minutes": b.period_minutes,
            "slot_periods": b.slot_periods, "deadline_hours": b.to_hours(deadline)}


def cmd_synth(args) -> int:
    catalog = load_catalog(args.catalog)
    stats = _stats(args.stats)
    job = synthesize_job(stats, args.seed, args.job_id or (args.stats if args.stats in REFERENCE_JOBS else "synth"),
                         catalog.billing)
    dump_job(job, args.out)
    print(f"# seed={args.seed}")
    print(f"wrote {len(job)} tasks to {args.out}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    catalog = load_catalog(args.catalog)
    job = _job(args, catalog)
    D = _deadline(args, job, catalog)
    pq, bq = plan(job, catalog, D, args.vm_time_limit)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, catalog, D)
    write_json(primary_to_doc(pq, meta), out / "pq.json")
    write_json(backup_to_doc(bq, meta), out / "bq.json")
    print(f"# seed={args.seed} period_minutes={catalog.billing.period_minutes}")
    print(f"job {job.job_id}: D = {D} periods ({catalog.billing.to_hours(D):.2f} h), "
          f"{len(pq.instances)} primary instances ({len(pq.spot_instances())} spot), "
          f"{len(bq.groups)} recovery groups, {len(bq.instances)} backup instances")
    return EXIT_OK


def cmd_simulate(args) -> int:
    catalog = load_catalog(args.catalog)
    pq = load_primary(args.pq)
    bq = load_backup(args.bq) if args.bq else BackupMap(pq.deadline)
    if args.events and args.scenario:
        raise UsageError("give at most one of --events or --scenario")
    if args.events:
        events = load_events(args.events)
    elif args.scenario:
        suite = {s.name: s for s in build_scenario_suite(pq, args.seed, catalog.billing)}
        if args.scenario not in suite:
            raise UsageError(f"scenario {args.scenario!r} not available ({', '.join(suite)})")
        events = list(suite[args.scenario].events)
    else:
        events = []
    report = simulate(pq, bq, events, args.policy, catalog.billing)
    doc = {"seed": args.seed, "period_minutes": catalog.billing.period_minutes, **report.to_dict()}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"# seed={args.seed}")
    print(f"policy={report.policy} makespan={report.makespan} deadline={report.deadline} "
          f"deadline_met={str(report.deadline_met).lower()} cost_usd={report.cost_total:.6f} "
          f"migrations={len(report.migrations)}")
    return EXIT_OK


def _parse_policies(text: str):
    names = [p.strip() for p in text.split(",") if p.strip()]
    if not names:
        raise UsageError("policy list is empty")
    try:
        return [Policy(n) for n in names]
    except ValueError as exc:
        raise UsageError(f"{exc}; choose from {', '.join(p.value for p in Policy)}") from None


def cmd_compare(args) -> int:
    catalog = load_catalog(args.catalog)
    policies = _parse_policies(args.policies)
    job = _job(args, catalog)
    D = _deadline(args, job, catalog)
    scenarios = None
    if args.price_trace:
        from .experiment import plan as _plan
        pq, _ = _plan(job, catalog, D, args.vm_time_limit)
        series = load_price_history(args.price_trace)
        threshold = _threshold(args.threshold, series)
        events = derive_hibernation_events(series, threshold, pq, catalog.billing.period_minutes)
        scenarios = [Scenario("no-hibernation", ()), Scenario("price-trace", tuple(events))]
    cmp = run_matrix(job, catalog, D, args.seed, args.vm_time_limit, policies, scenarios)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pm = catalog.billing.period_minutes
    (out / "compare.csv").write_text(comparison_csv(cmp, pm), encoding="utf-8")
    summary = "\n".join(summary_lines(cmp, pm)) + "\n"
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return EXIT_OK


def _threshold(text: str, series) -> float:
    if text == "avg24":
        return first_day_average(series)
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--threshold must be a price or 'avg24', got {text!r}") from None


def cmd_validate(args) -> int:
    catalog = load_catalog(args.catalog)
    pq = load_primary(args.pq)
    job = load_job(args.job) if args.job else None
    results = check_primary(pq, job, catalog.billing)
    if args.bq:
        results += check_backup(pq, load_backup(args.bq), catalog.billing)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_INVARIANT


def cmd_derive_events(args) -> int:
    catalog = load_catalog(args.catalog)
    series = load_price_history(args.prices)
    threshold = _threshold(args.threshold, series)
    pq = load_primary(args.pq)
    events = derive_hibernation_events(series, threshold, pq, catalog.billing.period_minutes)
    write_json(events_to_doc(events), args.out)
    print(f"threshold={threshold:.4f} events={len(events)}")
    for e in events:
        print(f"  {e.instance_id} start={e.start} duration={e.duration}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hibersched", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, job=True):
        sp.add_argument("--catalog", help="catalog JSON (default: bundled EC2 table)")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if job:
            sp.add_argument("--job", help="job CSV")
            sp.add_argument("--synth", help="COUNT,MIN_H,AVG_H,MAX_H,MEM_GB or J207/J402/J819/J595")
            sp.add_argument("--deadline", help="deadline in hours, or 'auto' (default: table value "
                                                "for named jobs, else auto)")
            sp.add_argument("--vm-time-limit", type=float, default=DEFAULT_VM_TIME_LIMIT)

    sp = sub.add_parser("synth", help="synthesize a job CSV from duration statistics")
    common(sp, job=False)
    sp.add_argument("--stats", required=True, help="COUNT,MIN_H,AVG_H,MAX_H,MEM_GB or a job name")
    sp.add_argument("--job-id")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("schedule", help="build primary and backup maps")
    common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("simulate", help="replay maps under a hibernation scenario")
    common(sp, job=False)
    sp.add_argument("--pq", required=True)
    sp.add_argument("--bq")
    sp.add_argument("--events", help="hibernation events JSON")
    sp.add_argument("--scenario", help="named scenario from the built-in suite")
    sp.add_argument("--policy", default=Policy.HIBERNATION_TOLERANT.value,
                    choices=[x.value for x in Policy])
    sp.add_argument("--out", help="report JSON path")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="run the policy x scenario matrix")
    common(sp)
    sp.add_argument("--policies", default=",".join(x.value for x in Policy))
    sp.add_argument("--price-trace", help="price CSV; replaces the suite with trace-derived events")
    sp.add_argument("--threshold", default="0.4", help="USD price or 'avg24'")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("validate", help="check map invariants")
    common(sp, job=False)
    sp.add_argument("--pq", required=True)
    sp.add_argument("--bq")
    sp.add_argument("--job")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("derive-events", help="hibernation events from a price history")
    common(sp, job=False)
    sp.add_argument("--prices", required=True)
    sp.add_argument("--threshold", default="0.4")
    sp.add_argument("--pq", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_derive_events)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ScenarioError, StatsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except HiberschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
