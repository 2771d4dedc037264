"""Edge-count discrepancy, dyadic level sets and the heavy-couple certificate.

For unit x, y a couple (i, j) is heavy when |x_i y_j| > sqrt(d)/n.  If every
pair of dyadic level sets (S_i, T_j) passes the two-branch discrepancy test,
the heavy part of <M y, x> is bounded by 2 U(K1, K2) sqrt(d) with

    U(K1, K2) = 16 K1 + 24 + 32 K2 + 8 K2 sqrt(6e) / (K1 ln K1).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .graphcore import Digraph01

COND1 = "Cond1"
COND2 = "Cond2"
FAIL = "Fail"


class CertificateViolation(AssertionError):
    """A passing certificate whose heavy sum exceeds the deterministic bound."""


@dataclass(frozen=True)
class DiscrepancyVerdict:
    edges: int
    expected: float
    verdict: str
    ratio: float


@dataclass
class HeavyCoupleCertificate:
    level_pairs: list
    all_pass: bool
    U: float
    bound: float
    heavy_sum: float
    light_sum: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def _as_index(S, n):
    idx = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError("index set out of range")
    return idx


def edge_count(g: Digraph01, S, T) -> int:
    """|E(S, T)|: edges leaving S and landing in T, via a bitmask of T."""
    n = g.n
    S = _as_index(S, n)
    T = _as_index(T, n)
    if S.size == 0 or T.size == 0:
        return 0
    mask = np.zeros(n, dtype=np.bool_)
    mask[T] = True
    sub = g.csr()[S]
    return int(np.count_nonzero(mask[sub.indices]))


def discrepancy_check(g: Digraph01, S, T, K1: float, K2: float, d: float) -> DiscrepancyVerdict:
    n = g.n
    S = _as_index(S, n)
    T = _as_index(T, n)
    if S.size == 0 or T.size == 0:
        raise ValueError("S and T must be non-empty")
    if K1 < 1 or K2 < 1:
        raise ValueError("K1, K2 must be >= 1")
    e = edge_count(g, S, T)
    return verdict_from_counts(e, S.size, T.size, n, K1, K2, d)


def verdict_from_counts(e: int, s: int, t: int, n: int, K1: float, K2: float, d: float) -> DiscrepancyVerdict:
    expected = d / n * s * t
    ratio = e / expected
    if e <= K1 * expected:
        return DiscrepancyVerdict(e, expected, COND1, ratio)
    big = max(s, t)
    if e * math.log(ratio) <= K2 * big * math.log(math.e * n / big):
        return DiscrepancyVerdict(e, expected, COND2, ratio)
    return DiscrepancyVerdict(e, expected, FAIL, ratio)


def dyadic_level_sets(x) -> list:
    """[(i, S_i)] with S_i = {k : |x_k| in [2^(i-1), 2^i) / sqrt(n)}, i >= 1, non-empty only.

    Coordinates below 1/sqrt(n) belong to no level set.
    """
    a = np.abs(np.asarray(x, dtype=float))
    n = a.size
    rt = math.sqrt(n)
    top = float(a.max(initial=0.0))
    if top * rt < 1.0:
        return []
    imax = max(int(math.ceil(math.log2(rt))) + 1, int(math.floor(math.log2(top * rt))) + 2)
    out = []
    for i in range(1, imax + 1):
        lo, hi = 2.0 ** (i - 1) / rt, 2.0 ** i / rt
        S = np.flatnonzero((a >= lo) & (a < hi))
        if S.size:
            out.append((i, S))
    return out


def couple_split_sums(g: Digraph01, x, y, d: float):
    """(light_sum, heavy_sum) of sum over ones of x_i y_j; heavy iff |x_i y_j| > sqrt(d)/n."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (g.n,) or y.shape != (g.n,):
        raise ValueError("dimension mismatch")
    prod = x[g.src] * y[g.dst]
    heavy = np.abs(prod) > math.sqrt(d) / g.n
    return float(prod[~heavy].sum()), float(prod[heavy].sum())


def heavy_couple_count(x, y, d: float) -> int:
    """Number of index pairs (i, j) with |x_i y_j| > sqrt(d)/n (edges or not)."""
    ax = np.abs(np.asarray(x, dtype=float))
    ay = np.sort(np.abs(np.asarray(y, dtype=float)))
    n = ax.size
    thr = math.sqrt(d) / n
    total = 0
    for v in ax[ax > 0]:
        total += ay.size - int(np.searchsorted(ay, thr / v, side="right"))
    return total


def U_constant(K1: float, K2: float) -> float:
    if K1 <= 1:
        raise ValueError("K1 must exceed 1")
    return 16 * K1 + 24 + 32 * K2 + 8 * K2 * math.sqrt(6 * math.e) / (K1 * math.log(K1))


def heavy_certificate(g: Digraph01, x, y, K1: float, K2: float, d: float,
                      debug: bool = False, unit_tol: float = 1e-9) -> HeavyCoupleCertificate:
    """Check discrepancy on every level-set pair and bound the heavy couples.

    Each pair (S_i, T_j) is tested on M and, mirrored, (T_j, S_i) on M^T.
    Raises CertificateViolation if all pairs pass yet |heavy_sum| exceeds
    2 U sqrt(d); that would contradict a deterministic bound.
    """
    if K1 <= 1 or K2 < 1:
        raise ValueError("need K1 > 1 and K2 >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for name, v in (("x", x), ("y", y)):
        if abs(np.linalg.norm(v) - 1.0) > unit_tol:
            raise ValueError(f"{name} must be a unit vector (norm {np.linalg.norm(v)!r})")
    n = g.n
    gt = g.transpose()
    Sx = dyadic_level_sets(x)
    Ty = dyadic_level_sets(y)
    pairs = []
    all_pass = True
    diag = {"alpha": {}, "beta": {}, "r": {}, "s": {}}
    for i, S in Sx:
        diag["alpha"][i] = 4.0 ** i / n * S.size
        for j, T in Ty:
            v = discrepancy_check(g, S, T, K1, K2, d)
            vt = discrepancy_check(gt, T, S, K1, K2, d)
            orient = "in" if S.size >= T.size else "out"
            pairs.append((i, j, v, orient))
            if v.verdict == FAIL or vt.verdict == FAIL:
                all_pass = False
            if debug:
                diag["r"][(i, j)] = v.ratio
                diag["s"][(i, j)] = math.sqrt(d) / 2.0 ** (i + j) * v.ratio
    for j, T in Ty:
        diag["beta"][j] = 4.0 ** j / n * T.size
    light, heavy = couple_split_sums(g, x, y, d)
    U = U_constant(K1, K2)
    bound = 2.0 * U * math.sqrt(d)
    if all_pass and abs(heavy) > bound:
        raise CertificateViolation(
            f"all {len(pairs)} level pairs pass but |heavy_sum|={abs(heavy)} > 2U sqrt(d)={bound}"
        )
    return HeavyCoupleCertificate(pairs, all_pass, U, bound, heavy, light, diag if debug else {})
