# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled successive-shortest-paths kernel for dense transportation.

Mirrors coricci.transport._mcf_py.solve_transport; selected at import when
the extension built successfully.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF MASS_EPS = 1e-15


def solve_transport(cost, supply, demand):
    """See coricci.transport._mcf_py.solve_transport."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] C = np.ascontiguousarray(cost, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.array(supply, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.array(demand, dtype=np.float64)
    cdef Py_ssize_t ns = C.shape[0]
    cdef Py_ssize_t nt = C.shape[1]
    cdef Py_ssize_t nv = ns + nt
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pot = np.zeros(nv)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] flow = np.zeros((ns, nt))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(nv)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent = np.empty(nv, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done = np.empty(nv, dtype=np.uint8)

    cdef double total = 0.0
    cdef Py_ssize_t i, j, u, v, target, root
    cdef double remaining, best, dt, rc, nd, eps
    for i in range(ns):
        total += a[i]
    remaining = total

    cdef double stop = MASS_EPS * (total if total > 1.0 else 1.0)
    while remaining > stop:
        for v in range(nv):
            dist[v] = np.inf
            parent[v] = -1
            done[v] = 0
        for i in range(ns):
            if a[i] > MASS_EPS:
                dist[i] = 0.0
        target = -1
        while True:
            u = -1
            best = np.inf
            for v in range(nv):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u < 0:
                break
            done[u] = 1
            if u >= ns and b[u - ns] > MASS_EPS:
                target = u
                break
            if u < ns:
                for j in range(nt):
                    v = ns + j
                    if done[v]:
                        continue
                    rc = C[u, j] + pot[u] - pot[v]
                    if rc < 0.0:
                        rc = 0.0
                    nd = dist[u] + rc
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = u
            else:
                j = u - ns
                for i in range(ns):
                    if done[i] or flow[i, j] <= MASS_EPS:
                        continue
                    rc = pot[u] - pot[i] - C[i, j]
                    if rc < 0.0:
                        rc = 0.0
                    nd = dist[u] + rc
                    if nd < dist[i]:
                        dist[i] = nd
                        parent[i] = u
        if target < 0:
            raise RuntimeError("transportation problem infeasible")
        dt = dist[target]
        for v in range(nv):
            if dist[v] < dt:
                pot[v] += dist[v]
            else:
                pot[v] += dt
        v = target
        eps = b[target - ns]
        while parent[v] >= 0:
            u = parent[v]
            if u >= ns and flow[v, u - ns] < eps:
                eps = flow[v, u - ns]
            v = u
        root = v
        if a[root] < eps:
            eps = a[root]
        v = target
        while parent[v] >= 0:
            u = parent[v]
            if u < ns:
                flow[u, v - ns] += eps
            else:
                flow[v, u - ns] -= eps
            v = u
        a[root] -= eps
        b[target - ns] -= eps
        remaining -= eps

    src, tgt = np.nonzero(np.asarray(flow) > MASS_EPS)
    return src, tgt, np.asarray(flow)[src, tgt], -np.asarray(pot)[:ns], np.asarray(pot)[ns:]
