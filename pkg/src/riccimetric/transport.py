"""Exact discrete optimal transport by the transportation simplex method.

The problem is ``min sum C[i,j] X[i,j]`` subject to row sums ``a`` and
column sums ``b`` (``sum a == sum b``), ``X >= 0``.  A basic solution is a
spanning tree on the ``m + n`` row/column lines; each pivot prices the tree
with dual potentials, brings in the most negative reduced cost and pushes
flow around the unique cycle it closes.  After a run of degenerate pivots
the entering rule switches to Bland's rule so the method cannot cycle.
"""

from __future__ import annotations

import numpy as np
from numba import njit


class TransportError(RuntimeError):
    pass


@njit(cache=True, nogil=True)
def _least_cost_start(a, b, C, X, basis):
    m, n = C.shape
    ra = a.copy()
    rb = b.copy()
    row_open = np.ones(m, dtype=np.bool_)
    col_open = np.ones(n, dtype=np.bool_)
    rows_left = m
    cols_left = n
    for _ in range(m + n - 1):
        best = np.inf
        bi = -1
        bj = -1
        for i in range(m):
            if not row_open[i]:
                continue
            for j in range(n):
                if col_open[j] and C[i, j] < best:
                    best = C[i, j]
                    bi = i
                    bj = j
        q = min(ra[bi], rb[bj])
        X[bi, bj] = q
        basis[bi, bj] = True
        ra[bi] -= q
        rb[bj] -= q
        # retire exactly one line per step so the basis stays a spanning tree
        if (ra[bi] <= rb[bj] and rows_left > 1) or cols_left == 1:
            row_open[bi] = False
            rows_left -= 1
            rb[bj] = rb[bj] + ra[bi]
            ra[bi] = 0.0
        else:
            col_open[bj] = False
            cols_left -= 1
            ra[bi] = ra[bi] + rb[bj]
            rb[bj] = 0.0


@njit(cache=True, nogil=True)
def _potentials(C, basis, u, v, seen_r, seen_c, queue):
    m, n = C.shape
    seen_r[:] = False
    seen_c[:] = False
    u[0] = 0.0
    seen_r[0] = True
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        line = queue[head]
        head += 1
        if line < m:
            i = line
            for j in range(n):
                if basis[i, j] and not seen_c[j]:
                    v[j] = C[i, j] - u[i]
                    seen_c[j] = True
                    queue[tail] = m + j
                    tail += 1
        else:
            j = line - m
            for i in range(m):
                if basis[i, j] and not seen_r[i]:
                    u[i] = C[i, j] - v[j]
                    seen_r[i] = True
                    queue[tail] = i
                    tail += 1
    return tail


@njit(cache=True, nogil=True)
def transport_simplex(a, b, C, max_iter=100000):
    """Optimal plan ``X`` and cost for supplies ``a``, demands ``b`` and costs ``C``.

    Returns ``(X, cost, status)``; status 0 = optimal, 1 = iteration cap hit,
    2 = basis lost its spanning-tree shape (numerical breakdown).
    """
    m, n = C.shape
    X = np.zeros((m, n))
    basis = np.zeros((m, n), dtype=np.bool_)
    _least_cost_start(a, b, C, X, basis)

    scale = 1.0
    for i in range(m):
        for j in range(n):
            if abs(C[i, j]) > scale:
                scale = abs(C[i, j])
    tol = 1e-12 * scale

    u = np.zeros(m)
    v = np.zeros(n)
    seen_r = np.zeros(m, dtype=np.bool_)
    seen_c = np.zeros(n, dtype=np.bool_)
    queue = np.zeros(m + n, dtype=np.int64)
    parent = np.zeros(m + n, dtype=np.int64)
    path = np.zeros(m + n + 1, dtype=np.int64)
    degenerate_run = 0
    status = 1

    for _ in range(max_iter):
        if _potentials(C, basis, u, v, seen_r, seen_c, queue) != m + n:
            status = 2
            break

        # entering cell
        p = -1
        q = -1
        best = -tol
        bland = degenerate_run > m * n
        for i in range(m):
            for j in range(n):
                if basis[i, j]:
                    continue
                r = C[i, j] - u[i] - v[j]
                if r < best:
                    best = r
                    p = i
                    q = j
                    if bland:
                        break
            if bland and p >= 0:
                break
        if p < 0:
            status = 0
            break

        # tree path from row p to column q (BFS over basic cells)
        parent[:] = -1
        parent[p] = p
        queue[0] = p
        head = 0
        tail = 1
        target = m + q
        while head < tail and parent[target] < 0:
            line = queue[head]
            head += 1
            if line < m:
                for j in range(n):
                    if basis[line, j] and parent[m + j] < 0:
                        parent[m + j] = line
                        queue[tail] = m + j
                        tail += 1
            else:
                j = line - m
                for i in range(m):
                    if basis[i, j] and parent[i] < 0:
                        parent[i] = line
                        queue[tail] = i
                        tail += 1
        # path[0] = column q, then alternating row/column lines back to row p
        length = 0
        line = target
        while True:
            path[length] = line
            length += 1
            if line == p:
                break
            line = parent[line]

        # cells along the path alternate -, +, -, ... starting next to (p, q)
        theta = np.inf
        li = -1
        lj = -1
        for k in range(length - 1):
            x = path[k]
            y = path[k + 1]
            if x < m:
                ci = x
                cj = y - m
            else:
                ci = y
                cj = x - m
            if k % 2 == 0:
                val = X[ci, cj]
                if val < theta or (val == theta and ci * n + cj < li * n + lj):
                    theta = val
                    li = ci
                    lj = cj
        for k in range(length - 1):
            x = path[k]
            y = path[k + 1]
            if x < m:
                ci = x
                cj = y - m
            else:
                ci = y
                cj = x - m
            if k % 2 == 0:
                X[ci, cj] -= theta
            else:
                X[ci, cj] += theta
        X[p, q] += theta
        X[li, lj] = 0.0
        basis[li, lj] = False
        basis[p, q] = True
        if theta > 0.0:
            degenerate_run = 0
        else:
            degenerate_run += 1

    cost = 0.0
    for i in range(m):
        for j in range(n):
            cost += C[i, j] * X[i, j]
    return X, cost, status


def solve(a, b, C) -> tuple[np.ndarray, float]:
    """Solve one balanced transportation problem; raises on breakdown."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    if C.shape != (len(a), len(b)):
        raise ValueError(f"cost matrix shape {C.shape} does not match ({len(a)}, {len(b)})")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty marginal")
    if not np.all(np.isfinite(C)):
        raise TransportError("infinite transport cost (disconnected supports)")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise ValueError(f"unbalanced marginals: {a.sum()} vs {b.sum()}")
    X, cost, status = transport_simplex(a, b, C)
    if status != 0:
        raise TransportError(f"transportation simplex failed (status {status})")
    return X, float(cost)
