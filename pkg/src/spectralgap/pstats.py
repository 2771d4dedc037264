"""Row/column p-counts, dispersion vectors, the interval-scan statistic,
gamma/delta switching ratios, codegrees and the exact switching identity."""
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graphcore import C0, DegreeSequencePair, Digraph01, Interval
from .norms import _psi_excess, _psi_solve, MAX_ITER, REL_TOL
from .sampler import ENUM_MAX_EDGES, ENUM_MAX_N, EnumerationTooLarge, _completions

C_CODEGREE = 0.01      # the exponent constant c in 1 / (1 - e^{-c d})
C_PL_STRONG = 0.001    # psi-norm threshold constant for the p-count bound
CODEGREE_MEMORY_CAP = 64 * 1024 * 1024


def _index_array(I, n):
    if isinstance(I, Interval):
        I.check(n)
        return I.indices()
    idx = np.asarray(sorted(set(int(i) for i in I)), dtype=np.int64)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError("index set out of range")
    return idx


def p_counts(g: Digraph01, I, side: str = "col") -> np.ndarray:
    """col: p[j] = d_in[j] - #{q in I : M[q, j] = 1};  row: p[j] = d_out[j] - #{q in I : M[j, q] = 1}."""
    idx = _index_array(I, g.n)
    if side == "col":
        return g.d_in - g.adj[idx, :].sum(axis=0, dtype=np.int64)
    if side == "row":
        return g.d_out - g.adj[:, idx].sum(axis=1, dtype=np.int64)
    raise ValueError(f"side must be 'col' or 'row', not {side!r}")


@njit(cache=True)
def _dispersion_sorted(p):
    n = p.shape[0]
    order = np.argsort(p, kind="mergesort")
    s = p[order].astype(np.float64)
    total = s.sum()
    out = np.empty(n, dtype=np.float64)
    prefix = 0.0
    for r in range(n):
        v = s[r]
        # r values below (or equal, earlier), n - r - 1 values above
        below = v * r - prefix
        above = (total - prefix - v) - v * (n - r - 1)
        out[order[r]] = below + above
        prefix += v
    return out


def dispersion(p) -> np.ndarray:
    """P[j] = sum_l |p[j] - p[l]| in O(n log n)."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty vector")
    return _dispersion_sorted(p)


@njit(cache=True)
def _scan(adj_rows, adj_cols, d_in, d_out, max_len, stride, rel_tol, max_iter):
    # adj_rows[i] is row i of M, adj_cols[j] is column j of M (= row j of M^T)
    n = d_in.shape[0]
    best = 0.0
    pc = np.empty(n, dtype=np.float64)
    pr = np.empty(n, dtype=np.float64)
    log_target = 1.0 + math.log(n)
    for start in range(0, n, stride):
        for j in range(n):
            pc[j] = d_in[j]
            pr[j] = d_out[j]
        length = 0
        while True:
            for vec in (pc, pr):
                a = np.abs(_dispersion_sorted(vec))
                # skip the solve when the constraint already holds at the running max
                if best > 0.0 and _psi_excess(a, best, log_target) <= 0.0:
                    continue
                v = _psi_solve(a, rel_tol, max_iter)
                if v > best:
                    best = v
            if length == max_len or start + length >= n:
                break
            q = start + length
            # removing row q lowers column counts; removing column q lowers row counts
            for j in range(n):
                pc[j] -= adj_rows[q, j]
                pr[j] -= adj_cols[q, j]
            length += 1
    return best


def ep_statistic(g: Digraph01, c0: float = C0, stride=None) -> float:
    """max over interval I (|I| <= c0 n) of max(psi(P^row(I)), psi(P^col(I))) / (n sqrt(d)).

    ``d`` is the maximum degree.  Starts run over multiples of ``stride``;
    lengths 0..floor(c0 n), updated incrementally.  The empty interval is
    included.
    """
    if not (0 < c0 < 1):
        raise ValueError("c0 must lie in (0, 1)")
    n = g.n
    if stride is None:
        stride = default_stride(n)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    d = int(max(g.d_in.max(), g.d_out.max()))
    if d == 0:
        return 0.0
    max_len = int(math.floor(c0 * n))
    rows = g.adj.astype(np.float64)
    cols = np.ascontiguousarray(rows.T)
    best = _scan(rows, cols, g.d_in.astype(np.float64), g.d_out.astype(np.float64),
                 max_len, int(stride), REL_TOL, MAX_ITER)
    return float(best) / (n * math.sqrt(d))


def default_stride(n: int) -> int:
    return 1 if n <= 512 else math.ceil(n / 512)


@dataclass(frozen=True)
class GammaDelta:
    gamma_kl: float
    gamma_lk: float
    delta_kl: float
    c_codegree: float
    easy_bound: float


def _gamma(pk, pl, d, c):
    floor09 = math.floor(0.9 * d)
    if pl < pk:
        core = pl / pk
    else:
        core = 1.0 + (pl - pk) / (pk - floor09)
    return core / (1.0 - math.exp(-c * d))


def gamma_delta(p, d: int, k: int, l: int, c: float = C_CODEGREE,
                d_in=None, c0: float = C0) -> GammaDelta:
    """Switching ratio bounds gamma_{k,l}, gamma_{l,k} and their deviation delta_{k,l}.

    When ``d_in`` is given and every p obeys (1-2c0) d_in <= p <= d_in with
    d_in in [(1-c0)d, d], delta is checked against 40|p_k - p_l|/d + 4e^{-cd}.
    """
    p = np.asarray(p)
    if c <= 0:
        raise ValueError("c must be positive")
    pk, pl = int(p[k]), int(p[l])
    floor09 = math.floor(0.9 * d)
    if pk <= floor09 or pl <= floor09:
        raise ValueError(f"need p_k, p_l > floor(0.9 d) = {floor09}; got {pk}, {pl}")
    g_kl = _gamma(pk, pl, d, c)
    g_lk = _gamma(pl, pk, d, c)
    delta = max(abs(1 - 1 / g_kl), abs(1 - 1 / g_lk), abs(1 - g_kl), abs(1 - g_lk))
    easy = 40.0 * abs(pk - pl) / d + 4.0 * math.exp(-c * d)
    if d_in is not None:
        d_in = np.asarray(d_in)
        admissible = (
            np.all(d_in >= (1 - c0) * d) and np.all(d_in <= d)
            and np.all(p <= d_in) and np.all(p >= (1 - 2 * c0) * d_in)
        )
        if admissible and delta > easy + 1e-12:
            raise AssertionError(
                f"delta={delta} exceeds 40|p_k-p_l|/d + 4e^(-cd) = {easy} (p_k={pk}, p_l={pl}, d={d}, c={c})"
            )
    return GammaDelta(g_kl, g_lk, delta, c, easy)


@njit(cache=True)
def _codegree_block(indptr, indices, keep, lo, hi, n):
    # max over column pairs (a, b), a in [lo, hi), b > a, of common ones in kept rows
    counts = np.zeros((hi - lo, n), dtype=np.int32)
    for r in range(n):
        if not keep[r]:
            continue
        s, e = indptr[r], indptr[r + 1]
        for u in range(s, e):
            a = indices[u]
            if a < lo or a >= hi:
                continue
            for w in range(u + 1, e):
                counts[a - lo, indices[w]] += 1
    return counts.max() if counts.size else 0


def codegree_max(g: Digraph01, I=(), memory_cap: int = CODEGREE_MEMORY_CAP) -> int:
    """max over i != j of |supp col_i  cap  supp col_j  cap  I^c|."""
    n = g.n
    if n < 2:
        return 0
    idx = _index_array(I, n)
    keep = np.ones(n, dtype=np.bool_)
    keep[idx] = False
    M = g.csr()
    M.sort_indices()
    indptr = M.indptr.astype(np.int64)
    indices = M.indices.astype(np.int64)
    width = max(1, min(n, memory_cap // (4 * n)))
    best = 0
    for lo in range(0, n, width):
        best = max(best, int(_codegree_block(indptr, indices, keep, lo, min(n, lo + width), n)))
    return best


@dataclass(frozen=True)
class RatioRow:
    r: int
    count_v: int
    count_vprime: int
    p_k: int
    p_l: int
    ok: bool
    ok_as_displayed: bool


def switching_ratio_check(deg: DegreeSequencePair, prefix_rows, v, vprime, k: int, l: int,
                          max_n: int = ENUM_MAX_N, max_edges: int = ENUM_MAX_EDGES) -> list:
    """Exact switching identity for the row after a fixed prefix.

    With m prefix rows fixed, p_j = d_in[j] - (ones of column j in the
    prefix).  Completions with row m equal to v (resp. v') are binned by
    r = |supp col_k  cap  supp col_l  cap  rows >= m|.  Double counting the
    switch on columns k, l gives, for every r,

        count_v(r) * (p_l - r) == count_v'(r) * (p_k - r).

    ``ok_as_displayed`` records the orientation with p_k and p_l swapped.
    """
    n = deg.n
    if n > max_n or deg.edges > max_edges:
        raise EnumerationTooLarge(f"ratio check guard: n={n}, edges={deg.edges}")
    v = np.asarray(v, dtype=np.int64)
    vprime = np.asarray(vprime, dtype=np.int64)
    diff = np.flatnonzero(v != vprime)
    if sorted(diff.tolist()) != sorted([k, l]) or k == l:
        raise ValueError("v and v' must differ exactly in coordinates k and l")
    if not (v[k] == 1 and vprime[l] == 1 and v[l] == 0 and vprime[k] == 0):
        raise ValueError("need v_k = v'_l = 1 and v_l = v'_k = 0")
    prefix = np.asarray(prefix_rows, dtype=np.int64).reshape(-1, n)
    m = prefix.shape[0]
    if m >= n:
        raise ValueError("prefix must leave at least one free row")
    if np.any(prefix.sum(axis=1) != deg.d_out[:m]):
        raise ValueError("prefix rows disagree with d_out")
    if v.sum() != deg.d_out[m]:
        raise ValueError("v has the wrong number of ones for row m")
    p = deg.d_in - prefix.sum(axis=0)
    if np.any(p < 0):
        raise ValueError("prefix exceeds column sums")

    def bins(row):
        cap = p - row
        out = {}
        if np.any(cap < 0):
            return out
        for rows in _completions(cap.tolist(), deg.d_out[m + 1:].tolist()):
            r = sum(1 for cols in rows if k in cols and l in cols)
            out[r] = out.get(r, 0) + 1
        return out

    bv, bvp = bins(v), bins(vprime)
    pk, pl = int(p[k]), int(p[l])
    result = []
    for r in sorted(set(bv) | set(bvp)):
        cv, cvp = bv.get(r, 0), bvp.get(r, 0)
        result.append(RatioRow(
            r, cv, cvp, pk, pl,
            ok=cv * (pl - r) == cvp * (pk - r),
            ok_as_displayed=cv * (pk - r) == cvp * (pl - r),
        ))
    return result


def ratio_configurations(deg: DegreeSequencePair, max_prefix: int = None):
    """Every valid (prefix_rows, v, v', k, l) for ``deg`` with prefixes that extend.

    Prefixes are all realizable first-m-row blocks, m = 0..max_prefix.
    """
    n = deg.n
    if max_prefix is None:
        max_prefix = n - 1
    d_in, d_out = deg.d_in.tolist(), deg.d_out.tolist()
    seen = set()
    for full in _completions(d_in, d_out):
        for m in range(0, min(max_prefix, n - 1) + 1):
            key = (m, tuple(full[:m]))
            if key in seen:
                continue
            seen.add(key)
            prefix = np.zeros((m, n), dtype=np.int64)
            for i, cols in enumerate(full[:m]):
                prefix[i, list(cols)] = 1
            for kk in range(n):
                for ll in range(n):
                    if kk == ll:
                        continue
                    for cols in _choose_rows(n, d_out[m]):
                        if kk in cols and ll not in cols:
                            v = np.zeros(n, dtype=np.int64)
                            v[list(cols)] = 1
                            vp = v.copy()
                            vp[kk], vp[ll] = 0, 1
                            yield prefix, v, vp, kk, ll


def _choose_rows(n, r):
    from itertools import combinations

    return combinations(range(n), r)


def ratio_sweep(deg: DegreeSequencePair, max_prefix: int = None,
                max_n: int = ENUM_MAX_N, max_edges: int = ENUM_MAX_EDGES):
    """Every row ``switching_ratio_check`` would produce over ``ratio_configurations``.

    Yields (m, prefix_rows, v, v', k, l, RatioRow).  Completions are
    enumerated once per (prefix, row) and binned for all column pairs at
    once, so this is the fast path for exhaustive sweeps.
    """
    from itertools import combinations

    n = deg.n
    if n > max_n or deg.edges > max_edges:
        raise EnumerationTooLarge(f"ratio sweep guard: n={n}, edges={deg.edges}")
    if max_prefix is None:
        max_prefix = n - 1
    d_in, d_out = deg.d_in.tolist(), deg.d_out.tolist()
    seen = set()
    for full in _completions(d_in, d_out):
        for m in range(0, min(max_prefix, n - 1) + 1):
            prefix = tuple(full[:m])
            if (m, prefix) in seen:
                continue
            seen.add((m, prefix))
            p = list(d_in)
            for cols in prefix:
                for c in cols:
                    p[c] -= 1
            rest = d_out[m + 1:]
            tables = {}
            for row in combinations(range(n), d_out[m]):
                cap = list(p)
                for c in row:
                    cap[c] -= 1
                table = {}
                if min(cap, default=0) >= 0:
                    for comp in _completions(cap, rest):
                        both = np.zeros((n, n), dtype=np.int64)
                        for cols in comp:
                            for a in cols:
                                for b in cols:
                                    both[a, b] += 1
                        for a in range(n):
                            for b in range(n):
                                key = (a, b, int(both[a, b]))
                                table[key] = table.get(key, 0) + 1
                tables[row] = table
            for row, table in tables.items():
                for k in row:
                    for l in range(n):
                        if l in row:
                            continue
                        vp = tuple(sorted((set(row) - {k}) | {l}))
                        other = tables[vp]
                        rs = sorted({r for (a, b, r) in table if (a, b) == (k, l)}
                                    | {r for (a, b, r) in other if (a, b) == (k, l)})
                        pk, pl = p[k], p[l]
                        for r in rs:
                            cv, cvp = table.get((k, l, r), 0), other.get((k, l, r), 0)
                            yield m, prefix, row, vp, k, l, RatioRow(
                                r, cv, cvp, pk, pl,
                                ok=cv * (pl - r) == cvp * (pk - r),
                                ok_as_displayed=cv * (pk - r) == cvp * (pl - r),
                            )
