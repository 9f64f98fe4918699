"""Spot price histories and threshold-derived hibernation traces."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError
from .model import Market
from .primary import PrimaryMap
from .simulator import HibernationEvent

PRICE_HEADER = ("timestamp_minutes", "vm_type", "price_usd")


@dataclass(frozen=True)
class PricePoint:
    timestamp: float  # minutes since the trace origin (= job start)
    vm_type_name: str
    price: float


def load_price_history(path) -> dict[str, list[PricePoint]]:
    """Per-type price series; timestamps must strictly increase per type."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    series: dict[str, list[PricePoint]] = {}
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != PRICE_HEADER:
            raise ParseError(f"{path}: expected header {','.join(PRICE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            try:
                ts, name, price = float(row[0]), row[1].strip(), float(row[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad number in {row}") from None
            if not (math.isfinite(ts) and math.isfinite(price)) or not name:
                raise ParseError(f"{path}:{lineno}: bad record {row}")
            if price < 0:
                raise ValidationError(f"{path}:{lineno}: negative price")
            pts = series.setdefault(name, [])
            if pts and ts <= pts[-1].timestamp:
                raise ValidationError(
                    f"{path}:{lineno}: timestamp {ts} for {name} is not after {pts[-1].timestamp}")
            pts.append(PricePoint(ts, name, price))
    return series


def dump_price_history(series: dict[str, list[PricePoint]], path) -> None:
    rows = sorted((p for pts in series.values() for p in pts),
                  key=lambda p: (p.timestamp, p.vm_type_name))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PRICE_HEADER)
        for p in rows:
            w.writerow([repr(p.timestamp), p.vm_type_name, repr(p.price)])


def above_threshold_intervals(points, threshold: float):
    """Maximal ``(start, end)`` minute intervals with price above ``threshold``.

    Prices hold until the next sample; ``end`` is ``None`` when the series
    finishes above the threshold.
    """
    out = []
    start = None
    for p in points:
        if p.price > threshold:
            if start is None:
                start = p.timestamp
        elif start is not None:
            out.append((start, p.timestamp))
            start = None
    if start is not None:
        out.append((start, None))
    return out


def _to_period(minutes: float, period_minutes: int) -> int:
    return int(math.floor(minutes / period_minutes + 0.5))


def derive_hibernation_events(series, threshold: float, pq: PrimaryMap,
                              period_minutes: int = 1) -> list[HibernationEvent]:
    """Hibernation events for every spot instance whose type crosses ``threshold``.

    Interval bounds are rounded to the nearest period. Onsets are clipped
    to the instance's contracted horizon; intervals entirely outside it are
    dropped.
    """
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    events = []
    for vm in sorted(pq.instances, key=lambda v: v.instance_id):
        if vm.market is not Market.SPOT:
            continue
        for a, b in above_threshold_intervals(series.get(vm.vm_type.name, ()), threshold):
            onset = _to_period(a, period_minutes)
            stop = None if b is None else _to_period(b, period_minutes)
            if onset >= vm.end_slot or (stop is not None and stop <= vm.start_slot):
                continue
            onset = max(onset, vm.start_slot)
            if stop is not None and stop <= onset:
                continue
            events.append(HibernationEvent(vm.instance_id, onset,
                                           None if stop is None else stop - onset))
    return events


def first_day_average(series, window_minutes: float = 24 * 60) -> float:
    """Time-weighted mean price over the first ``window_minutes``, across types."""
    means = []
    for pts in series.values():
        if not pts:
            continue
        acc = 0.0
        covered = 0.0
        for cur, nxt in zip(pts, list(pts[1:]) + [None]):
            a = max(cur.timestamp, 0.0)
            b = window_minutes if nxt is None else min(nxt.timestamp, window_minutes)
            if b > a:
                acc += cur.price * (b - a)
                covered += b - a
        if covered > 0:
            means.append(acc / covered)
    if not means:
        raise ValidationError("no price samples inside the averaging window")
    return sum(means) / len(means)
