"""
JIT-compiled kernels for the permutation chain

All kernels work on plain arrays: ``fwd``/``inv`` (int64 targets and
preimages), ``c1``/``c2`` (int64 lattice coordinates of the sites), the
energy ``table`` of shape (L, W) and the side lengths.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def jump_energy(c1, c2, L, W, table, src, dst):
    """xi(dst - src) looked up in the periodic table"""
    a = (c1[dst] - c1[src] + L) % L
    b = (c2[dst] - c2[src] + W) % W
    return table[a, b]


@njit(cache=True)
def swap_delta(fwd, c1, c2, L, W, table, x, y):
    """Energy change of exchanging the targets of x and y; +inf if forbidden"""
    px = fwd[x]
    py = fwd[y]
    new = jump_energy(c1, c2, L, W, table, x, py) + jump_energy(c1, c2, L, W, table, y, px)
    if np.isinf(new):
        return np.inf
    old = jump_energy(c1, c2, L, W, table, x, px) + jump_energy(c1, c2, L, W, table, y, py)
    return new - old


@njit(cache=True)
def metropolis_sweep(fwd, inv, c1, c2, L, W, table, pairs, picks, uniforms, alpha):
    """
    Run one Metropolis step per entry of ``picks``.

    picks[t] selects the neighbour pair, uniforms[t] decides acceptance.
    Returns (accepted moves, summed energy change).
    """
    accepted = 0
    delta_sum = 0.0
    for t in range(picks.shape[0]):
        x = pairs[picks[t], 0]
        y = pairs[picks[t], 1]
        d = swap_delta(fwd, c1, c2, L, W, table, x, y)
        if np.isinf(d):
            continue
        if d <= 0.0 or uniforms[t] < np.exp(-alpha * d):
            px = fwd[x]
            py = fwd[y]
            fwd[x] = py
            fwd[y] = px
            inv[py] = x
            inv[px] = y
            accepted += 1
            delta_sum += d
    return accepted, delta_sum


@njit(cache=True)
def total_energy(fwd, c1, c2, L, W, table):
    h = 0.0
    for x in range(fwd.shape[0]):
        h += jump_energy(c1, c2, L, W, table, x, fwd[x])
    return h


@njit(cache=True)
def cycle_labels(fwd):
    """
    Cycle decomposition in compressed form.

    Returns (cycle_of, order, offsets): cycle k occupies
    order[offsets[k]:offsets[k + 1]] in traversal order, starting at its
    minimal site, and cycles are numbered by ascending minimal site.
    """
    n = fwd.shape[0]
    cycle_of = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    offsets = np.empty(n + 1, dtype=np.int64)
    pos = 0
    k = 0
    for s in range(n):
        if cycle_of[s] >= 0:
            continue
        offsets[k] = pos
        x = s
        while cycle_of[x] < 0:
            cycle_of[x] = k
            order[pos] = x
            pos += 1
            x = fwd[x]
        k += 1
    offsets[k] = pos
    return cycle_of, order, offsets[: k + 1]


@njit(cache=True)
def reversal_delta(members, c1, c2, L, W, table):
    """Energy change of reversing the cycle members[0] -> members[1] -> ..."""
    k = members.shape[0]
    d = 0.0
    for j in range(k):
        a = members[j]
        b = members[(j + 1) % k]
        d += jump_energy(c1, c2, L, W, table, b, a) - jump_energy(c1, c2, L, W, table, a, b)
    return d


@njit(cache=True)
def reverse_members(fwd, inv, members):
    k = members.shape[0]
    for j in range(k):
        a = members[j]
        b = members[(j + 1) % k]
        fwd[b] = a
        inv[a] = b
