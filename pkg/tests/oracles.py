"""Independent reference implementations used only by the tests.

Each oracle takes a different route from the library code it checks:
brute-force scans, closed forms or scipy/numpy solvers.
"""
import itertools
import math
from functools import lru_cache

import numpy as np
from scipy import optimize


def count_by_column_profile(row_sums, col_sums) -> int:
    """Count 0-1 matrices by DP over the sorted multiset of column capacities.

    Columns with equal remaining capacity are interchangeable, so a row
    only chooses how many columns of each capacity value it uses.
    """
    if sum(row_sums) != sum(col_sums):
        return 0

    @lru_cache(maxsize=None)
    def rec(i, profile):
        if i == len(row_sums):
            return 1 if all(c == 0 for c in profile) else 0
        values = sorted(set(profile))
        mult = [profile.count(v) for v in values]
        total = 0
        for take in itertools.product(*[range(m + 1) for m in mult]):
            if sum(take) != row_sums[i]:
                continue
            if any(t and v == 0 for t, v in zip(take, values)):
                continue
            ways = 1
            new = []
            for v, m, t in zip(values, mult, take):
                ways *= math.comb(m, t)
                new += [v - 1] * t + [v] * (m - t)
            total += ways * rec(i + 1, tuple(sorted(new)))
        return total

    return rec(0, tuple(sorted(col_sums)))


def all_binary_matrices(n):
    for bits in itertools.product((0, 1), repeat=n * n):
        yield np.array(bits, dtype=np.uint8).reshape(n, n)


def brute_feasible(d_in, d_out) -> bool:
    n = len(d_in)
    for A in all_binary_matrices(n):
        if list(A.sum(axis=0)) == list(d_in) and list(A.sum(axis=1)) == list(d_out):
            return True
    return False


def psi_norm_brentq(x) -> float:
    a = np.abs(np.asarray(x, dtype=float))
    if not a.any():
        return 0.0
    n = a.size
    target = math.e * n

    def f(lam):
        return float(np.sum(np.exp(a / lam))) - target

    top = a.max()
    return optimize.brentq(f, top / (1 + math.log(n)) * 0.999999, top * 1.000001,
                           xtol=1e-15, rtol=1e-13)


def log_constraint_direct(a, lam):
    t = a / lam
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(t > 1, t * np.log(np.where(t > 0, t, 1.0)), 0.0)
    return float(v.sum()) / a.size


def log_norm_grid(x, points=2001) -> float:
    """Grid scan for the first feasible lambda, then brentq inside that cell."""
    a = np.abs(np.asarray(x, dtype=float))
    if not a.any():
        return 0.0
    grid = np.linspace(a.sum() / (math.e * a.size) * 0.5, a.sum(), points)
    feasible = np.array([log_constraint_direct(a, lam) <= 1.0 for lam in grid])
    k = int(np.argmax(feasible))
    if k == 0:
        raise ArithmeticError("grid too coarse")
    return optimize.brentq(lambda lam: log_constraint_direct(a, lam) - 1.0, grid[k - 1], grid[k],
                           xtol=1e-15, rtol=1e-13)


def dispersion_direct(p):
    p = np.asarray(p, dtype=float)
    return np.abs(p[:, None] - p[None, :]).sum(axis=1)


def ep_statistic_brute(adj, c0):
    adj = np.asarray(adj, dtype=np.int64)
    n = adj.shape[0]
    d = max(adj.sum(axis=0).max(), adj.sum(axis=1).max())
    best = 0.0
    for start in range(n):
        for length in range(0, int(math.floor(c0 * n)) + 1):
            if start + length > n:
                break
            I = list(range(start, start + length))
            pc = adj.sum(axis=0) - adj[I, :].sum(axis=0)
            pr = adj.sum(axis=1) - adj[:, I].sum(axis=1)
            for p in (pc, pr):
                best = max(best, psi_norm_brentq(dispersion_direct(p)))
    return best / (n * math.sqrt(d))


def codegree_dense(adj, I=()):
    A = np.asarray(adj, dtype=np.int64).copy()
    A[list(I), :] = 0
    C = A.T @ A
    np.fill_diagonal(C, 0)
    return int(C.max()) if C.size > 1 else 0


def ratio_bins_brute(n, d_in, d_out, prefix_rows, v, k, l):
    """Bin all matrices with the given prefix and row m = v by r."""
    m = len(prefix_rows)
    out = {}
    for A in all_binary_matrices(n):
        if list(A.sum(axis=0)) != list(d_in) or list(A.sum(axis=1)) != list(d_out):
            continue
        if any(list(A[i]) != list(prefix_rows[i]) for i in range(m)) or list(A[m]) != list(v):
            continue
        r = int(np.sum(A[m + 1:, k] & A[m + 1:, l]))
        out[r] = out.get(r, 0) + 1
    return out
