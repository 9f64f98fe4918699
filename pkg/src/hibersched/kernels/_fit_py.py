"""Pure-Python earliest-fit kernel (reference and fallback)."""

MEM_EPS = 1e-9


def earliest_fit(starts, ends, cores, mems, ncores, lo, hi, dur, mem, cap):
    """Earliest (core, start) where a ``dur``-long, ``mem``-GB task fits.

    ``starts/ends/cores/mems`` describe the placements already on one VM
    instance. The window must lie inside ``[lo, hi]``, keep the summed memory
    of concurrent placements at or below ``cap`` at every period, and touch
    a core with no overlapping placement. Ties go to the lowest core index.
    Returns ``(-1, -1)`` when nothing fits.
    """
    n = len(starts)
    if mem > cap + MEM_EPS or lo + dur > hi:
        return -1, -1
    cands = {lo}
    for e in ends:
        if e > lo:
            cands.add(e)
    for s in sorted(cands):
        f = s + dur
        if f > hi:
            break
        # memory peaks can only occur at s or at a placement start inside the window
        points = [s]
        for i in range(n):
            if s < starts[i] < f:
                points.append(starts[i])
        ok = True
        for q in points:
            used = mem
            for i in range(n):
                if starts[i] <= q < ends[i]:
                    used += mems[i]
            if used > cap + MEM_EPS:
                ok = False
                break
        if not ok:
            continue
        busy = [False] * ncores
        for i in range(n):
            if starts[i] < f and ends[i] > s:
                busy[cores[i]] = True
        for c in range(ncores):
            if not busy[c]:
                return c, s
    return -1, -1
