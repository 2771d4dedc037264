"""Exact enumeration for tiny margins and switch-chain sampling.

Directed model: uniform 0-1 matrices with prescribed row sums (out-degrees)
and column sums (in-degrees), loops allowed.  Undirected model: simple
d-regular graphs.  Both samplers start from a deterministic matrix and run
a symmetric switch chain, whose stationary law is uniform.

Chains draw from xoshiro256** seeded via splitmix64 (see ``_rng``), so a
given (margins, ChainConfig) always yields the same sample.
"""
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy import stats

from . import _chain
from ._rng import numpy_rng, xoshiro_state
from .graphcore import DegreeSequencePair, Digraph01, URegGraph, gale_ryser_feasible

ENUM_MAX_N = 6
ENUM_MAX_EDGES = 18


class InfeasibleDegrees(ValueError):
    pass


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ChainConfig:
    burn_in_switches: int
    spacing_switches: int
    seed: int

    def __post_init__(self):
        if self.burn_in_switches < 0:
            raise ValueError("burn-in must be >= 0")
        if self.spacing_switches < 1:
            raise ValueError("spacing must be >= 1")

    @classmethod
    def default(cls, num_edges: int, seed: int) -> "ChainConfig":
        """Burn-in 20 E ln(E+1) attempts, spacing 2E (E = number of ones)."""
        E = max(num_edges, 1)
        return cls(int(20 * E * math.log(E + 1)), 2 * E, seed)


# --- enumeration -----------------------------------------------------------

def _completions(col_cap, row_sums, start_row=0):
    """Yield lists of row supports (tuples) realizing row_sums under col_cap.

    Row-wise backtracking; a row may only use columns with spare capacity,
    and we prune when the remaining rows cannot absorb the remaining demand.
    """
    n_rows = len(row_sums)
    cap = list(col_cap)
    suffix = [0] * (n_rows + 1)
    for r in range(n_rows - 1, -1, -1):
        suffix[r] = suffix[r + 1] + row_sums[r]
    rows = []

    def choose(ncols, need, start):
        if need == 0:
            yield ()
            return
        for c in range(start, ncols - need + 1):
            if cap[c] > 0:
                for rest in choose(ncols, need - 1, c + 1):
                    yield (c,) + rest

    def rec(r):
        if r == n_rows:
            if not any(cap):
                yield list(rows)
            return
        if sum(cap) != suffix[r]:
            return
        remaining_rows = n_rows - r
        if max(cap, default=0) > remaining_rows:
            return
        for cols in choose(len(cap), row_sums[r], 0):
            for c in cols:
                cap[c] -= 1
            rows.append(cols)
            yield from rec(r + 1)
            rows.pop()
            for c in cols:
                cap[c] += 1

    yield from rec(start_row)


def _guard(n, edges, max_n, max_edges):
    if n > max_n or edges > max_edges:
        estimate = math.comb(n * n, edges) if edges <= n * n else 0
        raise EnumerationTooLarge(
            f"enumeration guard: n={n} (max {max_n}), edges={edges} (max {max_edges}); "
            f"search space up to C({n * n},{edges}) = {estimate:.3e}"
        )


def enumerate_all(deg: DegreeSequencePair, max_n: int = ENUM_MAX_N,
                  max_edges: int = ENUM_MAX_EDGES) -> list:
    """Every matrix in M_n(d_in, d_out), in lexicographic row-support order."""
    n = deg.n
    _guard(n, deg.edges, max_n, max_edges)
    out = []
    for rows in _completions(deg.d_in.tolist(), deg.d_out.tolist()):
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, cols in enumerate(rows):
            adj[i, list(cols)] = 1
        out.append(Digraph01(adj))
    return out


def count_all(deg: DegreeSequencePair, max_n: int = ENUM_MAX_N,
              max_edges: int = ENUM_MAX_EDGES) -> int:
    _guard(deg.n, deg.edges, max_n, max_edges)
    return sum(1 for _ in _completions(deg.d_in.tolist(), deg.d_out.tolist()))


# --- switch chains ----------------------------------------------------------

def switch_step(g: Digraph01, rng: np.random.Generator) -> bool:
    """One switch proposal on g (mutated in place); True iff accepted."""
    m = g.num_edges
    if m < 2:
        return False
    a, b = rng.integers(m), rng.integers(m)
    i, j, k, l = g.src[a], g.dst[a], g.src[b], g.dst[b]
    if i == k or j == l or g.adj[i, l] or g.adj[k, j]:
        return False
    g.adj[i, j] = g.adj[k, l] = 0
    g.adj[i, l] = g.adj[k, j] = 1
    g.dst[a], g.dst[b] = l, j
    g.invalidate()
    return True


def initial_digraph(deg: DegreeSequencePair) -> Digraph01:
    if not gale_ryser_feasible(deg):
        raise InfeasibleDegrees(f"no 0-1 matrix realizes {deg!r}")
    adj = _chain.greedy_matrix(deg.d_in, deg.d_out)
    if adj is None:  # pragma: no cover - greedy is exact on feasible margins
        raise InfeasibleDegrees(f"greedy construction failed for {deg!r}")
    return Digraph01(adj)


class DigraphChain:
    """A running directed switch chain; ``next()`` returns spaced samples."""

    def __init__(self, deg: DegreeSequencePair, cfg: ChainConfig):
        self.cfg = cfg
        g = initial_digraph(deg)
        self.adj = g.adj
        self.src = g.src
        self.dst = g.dst
        self.state = xoshiro_state(cfg.seed)
        self.attempts = 0
        self.accepted = 0
        self._run(cfg.burn_in_switches)
        self._fresh = True

    def _run(self, k):
        if k > 0:
            self.accepted += int(_chain.digraph_switches(self.adj, self.src, self.dst, self.state, k))
            self.attempts += k

    def advance(self):
        """Move to the next spaced state without copying it out."""
        if not self._fresh:
            self._run(self.cfg.spacing_switches)
        self._fresh = False

    def view(self) -> Digraph01:
        """The current state, sharing the chain's buffers (do not mutate)."""
        return Digraph01._from_state(self.adj, self.src, self.dst)

    def next(self) -> Digraph01:
        self.advance()
        return Digraph01._from_state(self.adj.copy(), self.src.copy(), self.dst.copy())


def sample_digraph(deg: DegreeSequencePair, cfg: ChainConfig) -> Digraph01:
    """Greedy start, then ``burn_in_switches`` switch attempts."""
    return DigraphChain(deg, cfg).next()


def digraph_stream(deg: DegreeSequencePair, cfg: ChainConfig, count: int) -> Iterator[Digraph01]:
    chain = DigraphChain(deg, cfg)
    for _ in range(count):
        yield chain.next()


def circulant_regular(n: int, d: int) -> np.ndarray:
    """Neighbors i +- 1..floor(d/2) (mod n), plus i + n/2 when d is odd."""
    if d < 0 or d >= n:
        raise ValueError("need 0 <= d < n")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even (n={n}, d={d})")
    adj = np.zeros((n, n), dtype=np.uint8)
    idx = np.arange(n)
    for s in range(1, d // 2 + 1):
        adj[idx, (idx + s) % n] = 1
        adj[idx, (idx - s) % n] = 1
    if d % 2:
        adj[idx, (idx + n // 2) % n] = 1
    return adj


class UndirectedChain:
    def __init__(self, n: int, d: int, cfg: ChainConfig):
        self.cfg = cfg
        g = URegGraph(circulant_regular(n, d), d)
        self.d = d
        self.adj = g.adj
        self.eu = g.eu
        self.ev = g.ev
        self.state = xoshiro_state(cfg.seed)
        self.attempts = 0
        self.accepted = 0
        self._run(cfg.burn_in_switches)
        self._fresh = True

    def _run(self, k):
        if k > 0:
            self.accepted += int(_chain.ugraph_switches(self.adj, self.eu, self.ev, self.state, k))
            self.attempts += k

    def next(self) -> URegGraph:
        if not self._fresh:
            self._run(self.cfg.spacing_switches)
        self._fresh = False
        return URegGraph(self.adj.copy(), self.d)


def _pairing_sample(n, d, seed, max_tries=100000):
    """Configuration-model pairing with rejection of loops and multi-edges."""
    rng = numpy_rng(seed)
    points = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        perm = rng.permutation(points)
        a, b = perm[0::2], perm[1::2]
        if np.any(a == b):
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        adj = np.zeros((n, n), dtype=np.uint8)
        adj[lo, hi] = 1
        adj[hi, lo] = 1
        return URegGraph(adj, d)
    raise RuntimeError(f"pairing model rejected {max_tries} times (n={n}, d={d})")


def sample_undirected(n: int, d: int, cfg: ChainConfig, method: str = "switch") -> URegGraph:
    """Random simple d-regular graph; ``method="pairing"`` is the d <= 4 cross-check."""
    if (n * d) % 2 or d >= n or d < 0:
        raise ValueError(f"no simple {d}-regular graph on {n} vertices")
    if method == "pairing":
        if d > 4:
            raise ValueError("pairing model is only enabled for d <= 4")
        return _pairing_sample(n, d, cfg.seed)
    if method != "switch":
        raise ValueError(f"unknown method {method!r}")
    return UndirectedChain(n, d, cfg).next()


def undirected_stream(n: int, d: int, cfg: ChainConfig, count: int) -> Iterator[URegGraph]:
    chain = UndirectedChain(n, d, cfg)
    for _ in range(count):
        yield chain.next()


def chi_square_uniformity(counts, total: Optional[int] = None):
    """Pearson statistic against the uniform law and its chi^2_{K-1} p-value."""
    counts = np.asarray(counts, dtype=float)
    K = counts.size
    if K < 2:
        raise ValueError("need at least two cells")
    if total is None:
        total = counts.sum()
    if total <= 0:
        raise ValueError("total must be positive")
    if counts.sum() != total:
        raise ValueError("counts do not sum to total")
    expected = total / K
    statistic = float(np.sum((counts - expected) ** 2) / expected)
    return statistic, float(stats.chi2.sf(statistic, K - 1))
