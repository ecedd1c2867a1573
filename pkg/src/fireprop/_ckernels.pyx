# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; statement-for-statement twin of ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef extern from *:
    """
    typedef unsigned __int128 fp_u128;
    """
    ctypedef unsigned long long fp_u128


cdef struct SM64:
    uint64_t state


cdef inline uint64_t sm_next(SM64* g) nogil:
    cdef uint64_t z
    g.state += <uint64_t>0x9E3779B97F4A7C15ULL
    z = g.state
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int64_t sm_below(SM64* g, int64_t bound) nogil:
    cdef fp_u128 prod = (<fp_u128>sm_next(g)) * (<fp_u128>(<uint64_t>bound))
    return <int64_t>(prod >> 64)


cdef inline int pick(int64_t* w, int k, int64_t r) nogil:
    cdef int j
    for j in range(k):
        if r < w[j]:
            return j
        r -= w[j]
    return -1


# (du, dv, dx, dn)
cdef int IDLE[5][4]
cdef int BURN[6][4]
IDLE[:] = [[-1, 0, 1, 1], [-1, 0, 1, 0], [-1, 0, 3, 0], [1, -1, 1, 0], [0, -1, 4, 0]]
BURN[:] = [[-1, 0, -1, 1], [-1, 0, -1, 0], [-1, 0, 1, 0], [1, -1, -1, 0], [0, -1, 2, 0], [0, 0, -2, 1]]

# (dx1, dx2, dy, du, dv, dn1, dn2)
cdef int STACK1[9][7]
cdef int STACK2[7][7]
cdef int EMPTY[5][7]
STACK1[:] = [
    [-2, 0, -1, 0, 0, 1, 0],
    [-2, 0, 1, 0, 0, 1, 0],
    [-1, -1, -1, 0, 0, 0, 1],
    [-1, -1, 1, 0, 0, 0, 1],
    [-1, 0, -1, -1, 0, 1, 0],
    [-1, 0, -1, 1, -1, 0, 0],
    [-1, 0, -1, -1, 0, 0, 0],
    [1, 0, 1, -1, 0, 0, 0],
    [1, 1, 1, 0, -1, 0, 0],
]
STACK2[:] = [
    [0, -2, -1, 0, 0, 0, 1],
    [0, -2, 1, 0, 0, 0, 1],
    [0, -1, -1, -1, 0, 1, 0],
    [0, -1, -1, 1, -1, 0, 0],
    [0, -1, -1, -1, 0, 0, 0],
    [2, -1, 1, -1, 0, 0, 0],
    [2, 0, 1, 0, -1, 0, 0],
]
EMPTY[:] = [
    [1, 0, -1, -1, 0, 1, 0],
    [1, 0, -1, -1, 0, 0, 0],
    [1, 0, -1, 1, -1, 0, 0],
    [3, 0, 1, -1, 0, 0, 0],
    [3, 1, 1, 0, -1, 0, 0],
]


def run_chain(int64_t n, int64_t alpha, uint64_t seed, checkpoints):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cps = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t ncp = cps.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] snaps = np.zeros((ncp, 5), dtype=np.int64)
    cdef SM64 g
    cdef int64_t u = n, v = alpha, x = 0, m = 0, lt = 0, i = 0, max_x = 0
    cdef int64_t s, d1, d3, total
    cdef int64_t w[6]
    cdef int k
    cdef Py_ssize_t j = 0
    g.state = seed
    with nogil:
        while True:
            while j < ncp and cps[j] == i:
                snaps[j, 0] = u
                snaps[j, 1] = v
                snaps[j, 2] = x
                snaps[j, 3] = m
                snaps[j, 4] = lt
                j += 1
            if u + v + x == 0:
                break
            if x == 0:
                s = 3 * u + 4 * v
                w[0] = 3 * u
                w[1] = 3 * u * (s - 3)
                w[2] = 3 * u * (s - 2)
                w[3] = 4 * v * (s - 2)
                w[4] = w[3]
                total = 2 * s * (s - 2)
                lt += 2
                k = pick(w, 5, sm_below(&g, total))
                u += IDLE[k][0]
                v += IDLE[k][1]
                x += IDLE[k][2]
                m += IDLE[k][3]
            else:
                d1 = 3 * u + 4 * v + x - 1
                if u == 0:
                    w[0] = 0
                    w[1] = 0
                    w[2] = 0
                    w[3] = 4 * v
                    w[4] = w[3]
                    w[5] = 2 * (x - 1)
                    total = 2 * d1
                else:
                    d3 = d1 - 2
                    w[0] = 3 * u
                    w[1] = 3 * u * (d1 - 3)
                    w[2] = 3 * u * d3
                    w[3] = 4 * v * d3
                    w[4] = w[3]
                    w[5] = 2 * (x - 1) * d3
                    total = 2 * d1 * d3
                k = pick(w, 6, sm_below(&g, total))
                u += BURN[k][0]
                v += BURN[k][1]
                x += BURN[k][2]
                m += BURN[k][3]
            i += 1
            if x > max_x:
                max_x = x
        while j < ncp:
            snaps[j, 0] = u
            snaps[j, 1] = v
            snaps[j, 2] = x
            snaps[j, 3] = m
            snaps[j, 4] = lt
            j += 1
    return lt // 2, m, i, max_x, snaps


def run_chain_batch(int64_t n, int64_t alpha, seeds, checkpoints):
    """Loop ``run_chain`` over an array of seeds; results stacked by seed."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    cdef Py_ssize_t r, reps = seeds.shape[0]
    cps = np.ascontiguousarray(checkpoints, dtype=np.int64)
    totals = np.zeros((reps, 4), dtype=np.int64)
    snaps = np.zeros((reps, cps.shape[0], 5), dtype=np.int64)
    for r in range(reps):
        f, c, z, mx, sn = run_chain(n, alpha, int(seeds[r]), cps)
        totals[r, 0] = f
        totals[r, 1] = c
        totals[r, 2] = z
        totals[r, 3] = mx
        snaps[r] = sn
    return totals, snaps


def run_coupled(int64_t n, int64_t alpha, uint64_t seed):
    cdef SM64 g
    cdef int64_t x1 = 0, x2 = 0, y = 2, u = n, v = alpha
    cdef int64_t n1 = 0, n2 = 0, lt = 0, i = 0
    cdef int64_t max_x1 = 0, max_x2 = 0, max_y = 2
    cdef int64_t dom_bad = 0, stack_bad = 0, y_up = 0, y_down = 0
    cdef int64_t s, x, d1, d3, a3, b3, total, c, e
    cdef int64_t w[9]
    cdef int k, dy
    cdef int* row
    g.state = seed
    with nogil:
        while u + v + x1 + x2 > 0:
            x = x1 + x2
            if x == 0:
                s = 3 * u + 4 * v
                w[0] = 3 * u
                w[1] = 3 * u * (s - 3)
                w[2] = 4 * v * (s - 2)
                w[3] = 3 * u * (s - 2)
                w[4] = 4 * v * (s - 2)
                total = 2 * s * (s - 2)
                lt += 2
                k = pick(w, 5, sm_below(&g, total))
                row = EMPTY[k]
            else:
                d1 = 3 * u + 4 * v + x - 1
                if u == 0:
                    d3 = 1
                    a3 = 0
                    b3 = 0
                    total = 2 * d1
                else:
                    d3 = d1 - 2
                    a3 = 3 * u
                    b3 = 3 * u * (d1 - 3)
                    total = 2 * d1 * d3
                if x1 > 0:
                    c = (x1 - 1) * d3
                    e = x2 * d3
                    w[0] = c
                    w[1] = c
                    w[2] = e
                    w[3] = e
                    w[4] = a3
                    w[5] = 4 * v * d3
                    w[6] = b3
                    w[7] = 3 * u * d3
                    w[8] = 4 * v * d3
                    k = pick(w, 9, sm_below(&g, total))
                    row = STACK1[k]
                else:
                    c = (x2 - 1) * d3
                    w[0] = c
                    w[1] = c
                    w[2] = a3
                    w[3] = 4 * v * d3
                    w[4] = b3
                    w[5] = 3 * u * d3
                    w[6] = 4 * v * d3
                    k = pick(w, 7, sm_below(&g, total))
                    row = STACK2[k]
            dy = row[2]
            if y == 2:
                dy = 1
            elif dy > 0:
                y_up += 1
            else:
                y_down += 1
            x1 += row[0]
            x2 += row[1]
            y += dy
            u += row[3]
            v += row[4]
            n1 += row[5]
            n2 += row[6]
            i += 1
            if x1 > max_x1:
                max_x1 = x1
            if x2 > max_x2:
                max_x2 = x2
            if y > max_y:
                max_y = y
            if x1 > y:
                dom_bad += 1
            if x2 > alpha - v or n2 > alpha - v:
                stack_bad += 1
    return (lt // 2, n1 + n2, i, max_x1, max_x2, max_y, n1, n2, dom_bad, stack_bad, y_up, y_down)


def drift_walk(int64_t b, int64_t d_num, int64_t d_den, uint64_t seed, int64_t max_steps):
    cdef SM64 g
    cdef int64_t total = 2 * d_den, down = d_den, up1 = d_den - 2 * d_num
    cdef int64_t a = 1, visits = 0, steps = 0, top = 1, r
    g.state = seed
    with nogil:
        while a < b and steps < max_steps:
            if a == 0:
                visits += 1
                a = 1
            else:
                r = sm_below(&g, total)
                if r < down:
                    a -= 1
                elif r < down + up1:
                    a += 1
                else:
                    a += 2
            steps += 1
            if a > top:
                top = a
    return visits, steps, top
