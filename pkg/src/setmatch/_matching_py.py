"""Pure-Python kernel for maximum-weight bipartite matching.

Fallback used when the compiled extension (`setmatch._matching_c`) is not
available. Same algorithm, same results, roughly two orders of magnitude
slower on large matrices; see benchmarks/backend_bench.py.

The algorithm is the shortest-augmenting-path formulation of the Hungarian
method with dual potentials, run on the minimization problem obtained by
subtracting every weight from the largest weight. Columns are zero-padded
(weight 0) up to the row count when the matrix has more rows than columns,
so each of the `r` rows is augmented exactly once: O(r^2 * max(r, c)).
"""

from __future__ import annotations

INF = float("inf")


def solve_lap(weights) -> list[int]:
    """Maximum-weight assignment of a nonnegative (r, c) float64 matrix.

    Returns row_to_col, one column index per row, -1 for rows parked on a
    padding column. Zero-weight pairs are NOT filtered here; the caller
    decides what counts as a selected edge.
    """
    r, c = weights.shape
    w = weights.tolist()
    cc = c if c >= r else r

    maxw = 0.0
    for row in w:
        m = max(row)
        if m > maxw:
            maxw = m

    # cost[i][j] = maxw - w[i][j], padded columns cost maxw (weight 0)
    cost = []
    for row in w:
        crow = [maxw - x for x in row]
        if cc > c:
            crow.extend([maxw] * (cc - c))
        cost.append(crow)

    u = [0.0] * (r + 1)
    v = [0.0] * (cc + 1)
    p = [0] * (cc + 1)  # p[j] = 1-based row matched to column j, 0 = free
    way = [0] * (cc + 1)

    for i in range(1, r + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (cc + 1)
        used = [False] * (cc + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            ui0 = u[i0]
            crow = cost[i0 - 1]
            for j in range(1, cc + 1):
                if not used[j]:
                    cur = crow[j - 1] - ui0 - v[j]
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

    row_to_col = [-1] * r
    for j in range(1, cc + 1):
        if p[j] != 0 and j <= c:
            row_to_col[p[j] - 1] = j - 1
    return row_to_col
