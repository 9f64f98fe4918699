"""Compare the compiled and pure-Python earliest-fit kernels.

Runs the kernel alone on random instances and then end to end inside the two
schedulers. Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import random
import time

import hibersched.backup as backup_mod
import hibersched.primary as primary_mod
from hibersched.catalog import default_catalog
from hibersched.experiment import plan
from hibersched.kernels import _fit_py
from hibersched.scenarios import REFERENCE_JOBS, synthesize_job

try:
    from hibersched.kernels import _fit as _fit_c
except ImportError:
    _fit_c = None


def random_calls(n, seed=0):
    rnd = random.Random(seed)
    calls = []
    for _ in range(n):
        ncores = rnd.choice((2, 4, 16, 32))
        starts, ends, cores, mems = [], [], [], []
        for c in range(ncores):
            t = 2
            for _ in range(rnd.randint(0, 6)):
                d = rnd.randint(5, 120)
                starts.append(t)
                ends.append(t + d)
                cores.append(c)
                mems.append(rnd.uniform(0.5, 4.0))
                t += d + rnd.choice((0, 0, rnd.randint(1, 30)))
        calls.append((starts, ends, cores, mems, ncores, 2, 900, rnd.randint(10, 300),
                      rnd.uniform(0.5, 4.0), 60.0))
    return calls


def time_kernel(fn, calls, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in calls:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def time_schedulers(fn, repeat):
    primary_mod.earliest_fit = fn
    backup_mod.earliest_fit = fn
    cat = default_catalog()
    st = REFERENCE_JOBS["J595"]
    job = synthesize_job(st, 0, "J595", cat.billing)
    D = cat.billing.hours(st.deadline_hours)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        plan(job, cat, D)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--calls", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    calls = random_calls(args.calls)
    impls = [("python", _fit_py.earliest_fit)]
    if _fit_c is not None:
        impls.append(("cython", _fit_c.earliest_fit))
    else:
        print("compiled kernel not built; timing the fallback only")
    if _fit_c is not None:
        assert all(_fit_c.earliest_fit(*a) == _fit_py.earliest_fit(*a) for a in calls)
    res = {}
    for name, fn in impls:
        res[name] = (time_kernel(fn, calls, args.repeat), time_schedulers(fn, args.repeat))
        k, s = res[name]
        print(f"{name:7s} kernel {args.calls} calls: {k * 1e3:9.1f} ms   J595 plan: {s * 1e3:8.1f} ms")
    if len(res) == 2:
        kp, sp = res["python"]
        kc, sc = res["cython"]
        print(f"speedup kernel x{kp / kc:.1f}, end to end x{sp / sc:.1f}")


if __name__ == "__main__":
    main()
