# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled earliest-fit kernel; same contract as the pure-Python version."""

from libc.stdlib cimport malloc, free

cdef double MEM_EPS = 1e-9


def earliest_fit(starts, ends, cores, mems, int ncores, long lo, long hi,
                 long dur, double mem, double cap):
    cdef Py_ssize_t n = len(starts)
    cdef Py_ssize_t i, j, k, m
    cdef long s, f, q, tmp
    cdef double used
    cdef bint ok
    if mem > cap + MEM_EPS or lo + dur > hi:
        return -1, -1
    cdef long *st = <long *> malloc((n + 1) * sizeof(long))
    cdef long *en = <long *> malloc((n + 1) * sizeof(long))
    cdef int *co = <int *> malloc((n + 1) * sizeof(int))
    cdef double *me = <double *> malloc((n + 1) * sizeof(double))
    cdef long *cand = <long *> malloc((n + 1) * sizeof(long))
    cdef char *busy = <char *> malloc((ncores + 1) * sizeof(char))
    if not st or not en or not co or not me or not cand or not busy:
        free(st); free(en); free(co); free(me); free(cand); free(busy)
        raise MemoryError()
    try:
        for i in range(n):
            st[i] = starts[i]
            en[i] = ends[i]
            co[i] = cores[i]
            me[i] = mems[i]
        m = 0
        cand[m] = lo
        m += 1
        for i in range(n):
            if en[i] > lo:
                cand[m] = en[i]
                m += 1
        # insertion sort; candidate lists are short
        for i in range(1, m):
            tmp = cand[i]
            j = i - 1
            while j >= 0 and cand[j] > tmp:
                cand[j + 1] = cand[j]
                j -= 1
            cand[j + 1] = tmp
        for k in range(m):
            if k > 0 and cand[k] == cand[k - 1]:
                continue
            s = cand[k]
            f = s + dur
            if f > hi:
                break
            ok = True
            for j in range(-1, n):
                if j >= 0:
                    if not (s < st[j] < f):
                        continue
                    q = st[j]
                else:
                    q = s
                used = mem
                for i in range(n):
                    if st[i] <= q < en[i]:
                        used += me[i]
                if used > cap + MEM_EPS:
                    ok = False
                    break
            if not ok:
                continue
            for i in range(ncores):
                busy[i] = 0
            for i in range(n):
                if st[i] < f and en[i] > s:
                    busy[co[i]] = 1
            for i in range(ncores):
                if not busy[i]:
                    return i, s
        return -1, -1
    finally:
        free(st); free(en); free(co); free(me); free(cand); free(busy)
