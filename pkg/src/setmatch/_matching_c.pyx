# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel for maximum-weight bipartite matching.

Identical algorithm and results as `setmatch._matching_py.solve_lap`;
shortest augmenting paths with dual potentials on the max->min converted,
column-padded cost matrix. This is the hot loop of exact-mode training.
"""

import numpy as np

from libc.math cimport INFINITY


def solve_lap(double[:, ::1] weights):
    """Maximum-weight assignment of a nonnegative (r, c) float64 matrix.

    Returns an intp array row_to_col, -1 for rows parked on a padding column.
    """
    cdef Py_ssize_t r = weights.shape[0]
    cdef Py_ssize_t c = weights.shape[1]
    cdef Py_ssize_t cc = c if c >= r else r
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur, maxw, ui0

    maxw = 0.0
    for i in range(r):
        for j in range(c):
            if weights[i, j] > maxw:
                maxw = weights[i, j]

    cost_arr = np.empty((r, cc), dtype=np.float64)
    u_arr = np.zeros(r + 1, dtype=np.float64)
    v_arr = np.zeros(cc + 1, dtype=np.float64)
    minv_arr = np.empty(cc + 1, dtype=np.float64)
    p_arr = np.zeros(cc + 1, dtype=np.intp)
    way_arr = np.zeros(cc + 1, dtype=np.intp)
    used_arr = np.zeros(cc + 1, dtype=np.uint8)

    cdef double[:, ::1] cost = cost_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] minv = minv_arr
    cdef Py_ssize_t[::1] p = p_arr
    cdef Py_ssize_t[::1] way = way_arr
    cdef unsigned char[::1] used = used_arr

    with nogil:
        for i in range(r):
            for j in range(cc):
                cost[i, j] = maxw - weights[i, j] if j < c else maxw

        for i in range(1, r + 1):
            p[0] = i
            j0 = 0
            for j in range(cc + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                ui0 = u[i0]
                delta = INFINITY
                j1 = 0
                for j in range(1, cc + 1):
                    if not used[j]:
                        cur = cost[i0 - 1, j - 1] - ui0 - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                        if minv[j] < delta:
                            delta = minv[j]
                            j1 = j
                for j in range(cc + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
                j0 = j1
                if p[j0] == 0:
                    break
            while j0:
                j1 = way[j0]
                p[j0] = p[j1]
                j0 = j1

    out = np.full(r, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] outv = out
    for j in range(1, cc + 1):
        if p[j] != 0 and j <= c:
            outv[p[j] - 1] = j - 1
    return out
