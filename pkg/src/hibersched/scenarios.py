"""Synthetic jobs shaped like the reference job statistics and the hibernation scenario suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .catalog import BillingConfig
from .errors import StatsError
from .model import Market
from .primary import PrimaryMap
from .simulator import HibernationEvent
from .workload import Job, TaskSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JobStats:
    """Shape of a job: task count, duration spread in hours, memory per task."""

    count: int
    min_hours: float
    avg_hours: float
    max_hours: float
    memory: float
    deadline_hours: float | None = None


# four BoT jobs from the Google cluster trace (March 2011)
REFERENCE_JOBS = {
    "J207": JobStats(31, 7.03, 19.75, 49.31, 6.10, 17.0),
    "J402": JobStats(103, 7.87, 29.83, 94.04, 2.90, 29.0),
    "J819": JobStats(68, 6.42, 18.87, 51.53, 3.97, 16.0),
    "J595": JobStats(97, 7.15, 45.80, 120.39, 3.14, 40.0),
}

MEAN_TOLERANCE = 0.05
MAX_ATTEMPTS = 500

SCENARIO_NAMES = ("no-hibernation", "hibernation", "hibernation-with-migration",
                  "immediate-migration")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def synthesize_job(stats: JobStats, seed=0, job_id: str = "synth",
                   billing: BillingConfig | None = None) -> Job:
    """Sample a job whose task durations match ``stats``.

    The minimum and the maximum each occur at least once and the mean lands
    within 5% of the requested average; the remaining durations are drawn
    from a scaled beta distribution and rejected until that holds.
    """
    billing = billing or BillingConfig()
    n, lo, avg, hi = stats.count, stats.min_hours, stats.avg_hours, stats.max_hours
    if n < 1:
        raise StatsError("count must be >= 1")
    if not stats.memory > 0:
        raise StatsError("memory must be > 0")
    if not 0 < lo <= avg <= hi:
        raise StatsError(f"need 0 < min <= avg <= max, got {lo}/{avg}/{hi}")
    if lo == hi:
        hours = np.full(n, lo)
    else:
        if n == 1:
            raise StatsError("a single task cannot hit distinct min and max")
        rng = _rng(seed)
        rest = n - 2
        if rest == 0:
            hours = np.array([lo, hi])
            if abs(hours.mean() - avg) > MEAN_TOLERANCE * avg:
                raise StatsError(f"two tasks {lo}/{hi} cannot average {avg}")
        else:
            target = (n * avg - lo - hi) / rest
            m = min(max((target - lo) / (hi - lo), 0.02), 0.98)
            for _ in range(MAX_ATTEMPTS):
                body = lo + (hi - lo) * rng.beta(4 * m, 4 * (1 - m), size=rest)
                hours = np.concatenate([[lo, hi], body])
                if abs(hours.mean() - avg) <= MEAN_TOLERANCE * avg:
                    break
            else:
                raise StatsError(f"could not reach mean {avg} h within 5% for {lo}/{hi} h")
        hours = hours[rng.permutation(n)]
    width = max(3, len(str(n - 1)))
    tasks = tuple(TaskSpec(f"t{i:0{width}d}", max(1, billing.hours(h)), float(stats.memory))
                  for i, h in enumerate(hours))
    return Job(job_id, tasks)


@dataclass(frozen=True)
class Scenario:
    name: str
    events: tuple[HibernationEvent, ...]


def build_scenario_suite(pq: PrimaryMap, seed=0, billing: BillingConfig | None = None,
                         onset_hours: float = 2.0, short_hours: float = 3.0,
                         long_hours: float = 1000.0) -> list[Scenario]:
    """The four evaluation scenarios with one randomly chosen spot instance.

    Without spot instances only the no-hibernation scenario is returned.
    """
    billing = billing or BillingConfig()
    suite = [Scenario("no-hibernation", ())]
    spots = sorted(vm.instance_id for vm in pq.instances if vm.market is Market.SPOT)
    if not spots:
        logger.warning("primary map has no spot instances; hibernation scenarios omitted")
        return suite
    victim = spots[int(_rng(seed).integers(len(spots)))]
    onset = billing.hours(onset_hours)
    short = HibernationEvent(victim, onset, billing.hours(short_hours))
    long_ = HibernationEvent(victim, onset, billing.hours(long_hours))
    suite += [
        Scenario("hibernation", (short,)),
        Scenario("hibernation-with-migration", (long_,)),
        Scenario("immediate-migration", (short,)),
    ]
    return suite
