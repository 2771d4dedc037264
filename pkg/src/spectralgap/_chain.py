"""numba kernels for the switch chains and the greedy starting matrix."""
import numpy as np
from numba import njit

from ._rng import randbelow


@njit(cache=True)
def digraph_switches(adj, src, dst, state, attempts):
    """Run ``attempts`` switch proposals in place; returns the accepted count.

    Proposal: two uniform 1-entries (i, j), (k, l); accepted iff i != k,
    j != l and (i, l), (k, j) are both 0.
    """
    m = src.shape[0]
    accepted = 0
    if m < 2:
        return 0
    for _ in range(attempts):
        a = randbelow(state, m)
        b = randbelow(state, m)
        i = src[a]
        j = dst[a]
        k = src[b]
        l = dst[b]
        if i == k or j == l:
            continue
        if adj[i, l] != 0 or adj[k, j] != 0:
            continue
        adj[i, j] = 0
        adj[k, l] = 0
        adj[i, l] = 1
        adj[k, j] = 1
        dst[a] = l
        dst[b] = j
        accepted += 1
    return accepted


@njit(cache=True)
def ugraph_switches(adj, eu, ev, state, attempts):
    """Symmetric two-edge switch: {a,b},{c,e} -> {a,c},{b,e}.

    Both edges and the orientation of the second are uniform; the move is
    accepted when the four endpoints are distinct and the new pairs absent.
    """
    m = eu.shape[0]
    accepted = 0
    if m < 2:
        return 0
    for _ in range(attempts):
        x = randbelow(state, m)
        y = randbelow(state, m)
        if x == y:
            continue
        a = eu[x]
        b = ev[x]
        if randbelow(state, 2) == 0:
            c = eu[y]
            e = ev[y]
        else:
            c = ev[y]
            e = eu[y]
        if a == c or a == e or b == c or b == e:
            continue
        if adj[a, c] != 0 or adj[b, e] != 0:
            continue
        adj[a, b] = 0
        adj[b, a] = 0
        adj[c, e] = 0
        adj[e, c] = 0
        adj[a, c] = 1
        adj[c, a] = 1
        adj[b, e] = 1
        adj[e, b] = 1
        eu[x] = a
        ev[x] = c
        eu[y] = b
        ev[y] = e
        accepted += 1
    return accepted


def greedy_matrix(d_in, d_out):
    """Row-by-row fill, each row taking the columns with largest remaining demand.

    Ties break toward the lower column index.  Succeeds whenever the margins
    are feasible; returns None otherwise.
    """
    n = len(d_in)
    remaining = np.array(d_in, dtype=np.int64)
    adj = np.zeros((n, n), dtype=np.uint8)
    order = np.arange(n)
    for i in range(n):
        r = int(d_out[i])
        if r == 0:
            continue
        # stable sort by descending remaining demand
        cols = order[np.argsort(-remaining, kind="stable")][:r]
        if r > n or remaining[cols].min() <= 0:
            return None
        adj[i, cols] = 1
        remaining[cols] -= 1
    if remaining.any():
        return None
    return adj
