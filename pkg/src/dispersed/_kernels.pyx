# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: batched greedy evaluation and exhaustive oracles.

Every function here has a twin with the same signature in ``_kernels_py``.
The greedy evaluators perform the same floating-point operations in the same
order as the Python twins, so both backends return bit-identical values.
"""
import numpy as np

from libc.math cimport pow
from libc.stdlib cimport malloc, free


cdef double _pack(const double[:] v, const double[:] s, double capacity,
                  const long[:] order) nogil:
    cdef Py_ssize_t k, i
    cdef double remaining = capacity
    cdef double total = 0.0
    for k in range(order.shape[0]):
        i = order[k]
        if s[i] <= remaining:
            remaining -= s[i]
            total += v[i]
    return total


def knapsack_greedy_values(const double[:] values, const double[:] sizes,
                           double capacity, const double[:] rhos):
    """Better-of-two greedy knapsack value at each rho in ``rhos``."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = rhos.shape[0]
    cdef Py_ssize_t r, i, j, key_i
    cdef double key_score, base, ratio_total
    out = np.empty(m, dtype=np.float64)
    cdef double[:] out_v = out
    order_arr = np.empty(n, dtype=np.int64)
    cdef long[:] order = order_arr
    score_arr = np.empty(n, dtype=np.float64)
    cdef double[:] score = score_arr

    # value order: stable insertion sort on v descending
    for i in range(n):
        key_i = i
        j = i - 1
        while j >= 0 and values[order[j]] < values[key_i]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key_i
    base = _pack(values, sizes, capacity, order)

    for r in range(m):
        for i in range(n):
            score[i] = values[i] / pow(sizes[i], rhos[r])
        for i in range(n):
            key_i = i
            key_score = score[i]
            j = i - 1
            while j >= 0 and score[order[j]] < key_score:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = key_i
        ratio_total = _pack(values, sizes, capacity, order)
        out_v[r] = ratio_total if ratio_total > base else base
    return out


def mwis_greedy_weights(const double[:] weights, const unsigned char[:, :] adj,
                        const double[:] rhos, bint residual=True):
    """Greedy independent-set weight at each rho in ``rhos``."""
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t m = rhos.shape[0]
    cdef Py_ssize_t r, v, x, y, best
    cdef double rho, sc, best_score, total
    out = np.empty(m, dtype=np.float64)
    cdef double[:] out_v = out
    cdef long *deg0 = <long *> malloc(n * sizeof(long))
    cdef long *deg = <long *> malloc(n * sizeof(long))
    cdef char *alive = <char *> malloc(n * sizeof(char))
    cdef char *gone = <char *> malloc(n * sizeof(char))
    try:
        for v in range(n):
            deg0[v] = 0
            for y in range(n):
                if adj[v, y]:
                    deg0[v] += 1
        for r in range(m):
            rho = rhos[r]
            for v in range(n):
                deg[v] = deg0[v]
                alive[v] = 1
            total = 0.0
            while True:
                best = -1
                best_score = 0.0
                for v in range(n):
                    if alive[v]:
                        sc = weights[v] / pow(<double>(1 + deg[v]), rho)
                        if best < 0 or sc > best_score:
                            best = v
                            best_score = sc
                if best < 0:
                    break
                total += weights[best]
                for v in range(n):
                    gone[v] = 0
                gone[best] = 1
                for v in range(n):
                    if alive[v] and adj[best, v]:
                        gone[v] = 1
                for v in range(n):
                    if gone[v]:
                        alive[v] = 0
                if residual:
                    for x in range(n):
                        if gone[x]:
                            for y in range(n):
                                if alive[y] and adj[x, y]:
                                    deg[y] -= 1
            out_v[r] = total
    finally:
        free(deg0)
        free(deg)
        free(alive)
        free(gone)
    return out


cdef double _knap_dfs(Py_ssize_t k, Py_ssize_t n, const double *v, const double *s,
                      const double *suffix, double room, double acc,
                      double best) nogil:
    if acc > best:
        best = acc
    if k == n or acc + suffix[k] <= best:
        return best
    if s[k] <= room:
        best = _knap_dfs(k + 1, n, v, s, suffix, room - s[k], acc + v[k], best)
    return _knap_dfs(k + 1, n, v, s, suffix, room, acc, best)


def brute_force_knapsack(const double[:] values, const double[:] sizes, double capacity):
    """Exact knapsack optimum by depth-first enumeration with a value bound."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    order = np.argsort(-np.asarray(values), kind="stable")
    v_arr = np.ascontiguousarray(np.asarray(values)[order])
    s_arr = np.ascontiguousarray(np.asarray(sizes)[order])
    suf_arr = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        suf_arr[i] = suf_arr[i + 1] + v_arr[i]
    cdef double[:] vv = v_arr
    cdef double[:] ss = s_arr
    cdef double[:] suf = suf_arr
    if n == 0:
        return 0.0
    return _knap_dfs(0, n, &vv[0], &ss[0], &suf[0], capacity, 0.0, 0.0)


cdef double _mwis_dfs(Py_ssize_t k, Py_ssize_t n, const double *w,
                      const unsigned long long *nbr, unsigned long long chosen,
                      const double *suffix, double acc, double best) nogil:
    if acc > best:
        best = acc
    if k == n or acc + suffix[k] <= best:
        return best
    if not (nbr[k] & chosen):
        best = _mwis_dfs(k + 1, n, w, nbr, chosen | (1ULL << k), suffix, acc + w[k], best)
    return _mwis_dfs(k + 1, n, w, nbr, chosen, suffix, acc, best)


def brute_force_mwis(const double[:] weights, const unsigned char[:, :] adj):
    """Exact maximum-weight independent set value (n <= 63)."""
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t i, j
    if n == 0:
        return 0.0
    nbr_arr = np.zeros(n, dtype=np.uint64)
    cdef unsigned long long[:] nbr = nbr_arr
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                nbr[i] |= (1ULL << j)
    suf_arr = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        suf_arr[i] = suf_arr[i + 1] + weights[i]
    w_arr = np.ascontiguousarray(weights)
    cdef double[:] ww = w_arr
    cdef double[:] suf = suf_arr
    return _mwis_dfs(0, n, &ww[0], &nbr[0], 0, &suf[0], 0.0, 0.0)


def brute_force_iqp(const double[:, :] A):
    """max over z in {-1,+1}^n of z^T A z, by Gray-code enumeration."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k
    cdef unsigned long long step, total_steps
    cdef double obj, best, delta
    if n == 0:
        return 0.0
    z_arr = np.ones(n)
    h_arr = np.asarray(A).sum(axis=1)
    cdef double[:] z = z_arr
    cdef double[:] h = h_arr
    obj = 0.0
    for i in range(n):
        obj += h[i]
    best = obj
    # z[n-1] stays +1 (global sign symmetry)
    total_steps = 1ULL << (n - 1)
    for step in range(1, total_steps):
        k = 0
        while not ((step >> k) & 1):
            k += 1
        # flipping z_k: change = -4 z_k (h_k - a_kk z_k)
        delta = -4.0 * z[k] * (h[k] - A[k, k] * z[k])
        obj += delta
        z[k] = -z[k]
        for j in range(n):
            h[j] += 2.0 * A[j, k] * z[k]
        if obj > best:
            best = obj
    return best
