"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

The greedy evaluators mirror the compiled loops operation for operation so
that both backends agree bitwise.  The exhaustive oracles use vectorised numpy
enumeration instead of depth-first search; they agree with the compiled
oracles up to floating-point summation order.
"""
import numpy as np


def _pack(values, sizes, capacity, order):
    remaining = capacity
    total = 0.0
    for i in order:
        if sizes[i] <= remaining:
            remaining -= sizes[i]
            total += values[i]
    return total


def knapsack_greedy_values(values, sizes, capacity, rhos):
    values = [float(x) for x in values]
    sizes = [float(x) for x in sizes]
    capacity = float(capacity)
    n = len(values)
    base = _pack(values, sizes, capacity, sorted(range(n), key=lambda i: (-values[i], i)))
    out = np.empty(len(rhos))
    for r, rho in enumerate(rhos):
        rho = float(rho)
        score = [values[i] / sizes[i] ** rho for i in range(n)]
        order = sorted(range(n), key=lambda i: (-score[i], i))
        ratio_total = _pack(values, sizes, capacity, order)
        out[r] = ratio_total if ratio_total > base else base
    return out


def mwis_greedy_weights(weights, adj, rhos, residual=True):
    weights = [float(x) for x in weights]
    n = len(weights)
    adj = np.asarray(adj, dtype=bool)
    nbrs = [np.flatnonzero(adj[v]).tolist() for v in range(n)]
    deg0 = [len(nb) for nb in nbrs]
    out = np.empty(len(rhos))
    for r, rho in enumerate(rhos):
        rho = float(rho)
        deg = list(deg0)
        alive = [True] * n
        total = 0.0
        while True:
            best = -1
            best_score = 0.0
            for v in range(n):
                if alive[v]:
                    sc = weights[v] / float(1 + deg[v]) ** rho
                    if best < 0 or sc > best_score:
                        best = v
                        best_score = sc
            if best < 0:
                break
            total += weights[best]
            gone = [best] + [v for v in nbrs[best] if alive[v]]
            for v in gone:
                alive[v] = False
            if residual:
                for x in gone:
                    for y in nbrs[x]:
                        if alive[y]:
                            deg[y] -= 1
        out[r] = total
    return out


def _subset_sums(x):
    sums = np.zeros(1)
    for xi in x:
        sums = np.concatenate([sums, sums + xi])
    return sums


def brute_force_knapsack(values, sizes, capacity):
    # meet in the middle over the two halves of the item list
    values = np.asarray(values, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    n = len(values)
    if n == 0:
        return 0.0
    h = n // 2
    va, sa = _subset_sums(values[:h]), _subset_sums(sizes[:h])
    vb, sb = _subset_sums(values[h:]), _subset_sums(sizes[h:])
    order = np.argsort(sb, kind="stable")
    sb, vb = sb[order], np.maximum.accumulate(vb[order])
    ok = sa <= capacity
    va, sa = va[ok], sa[ok]
    idx = np.searchsorted(sb, capacity - sa, side="right") - 1
    # idx >= 0 always: the empty subset has size 0
    return float(np.max(va + vb[idx]))


def brute_force_mwis(weights, adj):
    weights = np.asarray(weights, dtype=float)
    adj = np.asarray(adj, dtype=bool)
    n = len(weights)
    if n == 0:
        return 0.0
    masks = np.arange(1 << n, dtype=np.int64)
    valid = np.ones(1 << n, dtype=bool)
    for v in range(n):
        nbr = 0
        for u in np.flatnonzero(adj[v]):
            nbr |= 1 << int(u)
        has_v = ((masks >> v) & 1).astype(bool)
        valid &= ~(has_v & ((masks & nbr) != 0))
    total = _subset_sums(weights)
    return float(np.max(total[valid]))


def brute_force_iqp(A):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return 0.0
    best = -np.inf
    # z[n-1] fixed to +1 by sign symmetry; enumerate the rest in chunks
    m = n - 1
    chunk = 1 << min(m, 14)
    for start in range(0, 1 << m, chunk):
        codes = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)
        bits = (codes[:, None] >> np.arange(m)) & 1
        Z = np.ones((len(codes), n))
        Z[:, :m] = 1.0 - 2.0 * bits
        obj = np.einsum("ki,ij,kj->k", Z, A, Z)
        best = max(best, float(obj.max()))
    return best
