"""Graph and 0-1 matrix types, degree-sequence checks, corner extraction, file I/O.

Indices are 0-based in memory and 1-based in files.  Directed graphs may
carry loops (diagonal ones); undirected graphs are simple.
"""
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

C0 = 0.001


class GraphFormatError(ValueError):
    """Malformed graph file; the message names the offending line."""


@dataclass(frozen=True, eq=False)
class DegreeSequencePair:
    d_in: np.ndarray
    d_out: np.ndarray

    def __post_init__(self):
        d_in = np.asarray(self.d_in, dtype=np.int64)
        d_out = np.asarray(self.d_out, dtype=np.int64)
        object.__setattr__(self, "d_in", d_in)
        object.__setattr__(self, "d_out", d_out)
        if d_in.ndim != 1 or d_in.shape != d_out.shape or d_in.size == 0:
            raise ValueError("degree sequences must be non-empty vectors of equal length")
        n = d_in.size
        if d_in.min() < 0 or d_out.min() < 0:
            raise ValueError("degrees must be non-negative")
        if d_in.max() > n or d_out.max() > n:
            raise ValueError("degrees cannot exceed n")
        if d_in.sum() != d_out.sum():
            raise ValueError("in- and out-degree sums differ")

    @property
    def n(self) -> int:
        return int(self.d_in.size)

    @property
    def edges(self) -> int:
        return int(self.d_out.sum())

    @classmethod
    def regular(cls, n: int, d: int) -> "DegreeSequencePair":
        return cls(np.full(n, d), np.full(n, d))

    def __eq__(self, other):
        return (
            isinstance(other, DegreeSequencePair)
            and np.array_equal(self.d_in, other.d_in)
            and np.array_equal(self.d_out, other.d_out)
        )

    def __repr__(self):
        return f"DegreeSequencePair(d_in={self.d_in.tolist()}, d_out={self.d_out.tolist()})"


class Digraph01:
    """A 0-1 matrix (directed graph, loops allowed) with edge list and dense bitmap.

    ``adj[i, j] == 1`` iff edge i -> j.  Row and column supports are derived
    from the bitmap and cached; the switch chain invalidates the cache.
    """

    def __init__(self, adj):
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency must be 0-1")
        self.adj = np.ascontiguousarray(a, dtype=np.uint8)
        src, dst = np.nonzero(self.adj)
        self.src = src.astype(np.int64)
        self.dst = dst.astype(np.int64)
        self._cache = {}

    @classmethod
    def from_edges(cls, n: int, edges) -> "Digraph01":
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if adj[i, j]:
                raise ValueError(f"duplicate edge ({i}, {j})")
            adj[i, j] = 1
        return cls(adj)

    @classmethod
    def _from_state(cls, adj, src, dst) -> "Digraph01":
        g = cls.__new__(cls)
        g.adj = adj
        g.src = src
        g.dst = dst
        g._cache = {}
        return g

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.src.size)

    def invalidate(self):
        self._cache.clear()

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def d_out(self) -> np.ndarray:
        return self._cached("d_out", lambda: self.adj.sum(axis=1, dtype=np.int64))

    @property
    def d_in(self) -> np.ndarray:
        return self._cached("d_in", lambda: self.adj.sum(axis=0, dtype=np.int64))

    @property
    def deg(self) -> DegreeSequencePair:
        return DegreeSequencePair(self.d_in, self.d_out)

    @property
    def row_support(self) -> list:
        return self._cached("rows", lambda: [np.flatnonzero(r) for r in self.adj])

    @property
    def col_support(self) -> list:
        return self._cached("cols", lambda: [np.flatnonzero(c) for c in self.adj.T])

    def csr(self) -> sp.csr_matrix:
        return self._cached("csr", lambda: sp.csr_matrix(self.adj, dtype=float))

    def is_regular(self):
        """Common degree d if every in- and out-degree equals d, else None."""
        d = int(self.d_out[0])
        if np.all(self.d_out == d) and np.all(self.d_in == d):
            return d
        return None

    def transpose(self) -> "Digraph01":
        return Digraph01(self.adj.T)

    def copy(self) -> "Digraph01":
        return Digraph01._from_state(self.adj.copy(), self.src.copy(), self.dst.copy())

    def edges(self):
        """Edges as sorted (i, j) tuples, row-major."""
        i, j = np.nonzero(self.adj)
        return list(zip(i.tolist(), j.tolist()))

    def key(self) -> bytes:
        return np.packbits(self.adj).tobytes()

    def validate(self):
        """Check edge list, bitmap and supports mirror each other."""
        n = self.n
        if self.src.size != int(self.adj.sum()):
            raise AssertionError("edge list size disagrees with bitmap")
        if not np.all(self.adj[self.src, self.dst] == 1):
            raise AssertionError("edge list entry missing from bitmap")
        if len(set(zip(self.src.tolist(), self.dst.tolist()))) != self.src.size:
            raise AssertionError("duplicate edge in edge list")
        rows, cols = self.row_support, self.col_support
        for i in range(n):
            if rows[i].size != self.d_out[i] or cols[i].size != self.d_in[i]:
                raise AssertionError("support size disagrees with degree")
            for j in rows[i]:
                if i not in cols[j]:
                    raise AssertionError(f"row support of {i} has {j} but column support of {j} lacks {i}")

    def __eq__(self, other):
        return isinstance(other, Digraph01) and np.array_equal(self.adj, other.adj)

    def __repr__(self):
        return f"Digraph01(n={self.n}, edges={self.num_edges})"


class URegGraph:
    """Simple undirected d-regular graph on n vertices."""

    def __init__(self, adj, d=None):
        a = np.ascontiguousarray(np.asarray(adj), dtype=np.uint8)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency must be 0-1")
        if not np.array_equal(a, a.T):
            raise ValueError("undirected adjacency must be symmetric")
        if np.any(np.diagonal(a)):
            raise ValueError("undirected graphs may not have loops")
        degs = a.sum(axis=1)
        dd = int(degs[0]) if d is None else int(d)
        if not np.all(degs == dd):
            raise ValueError(f"graph is not {dd}-regular")
        self.adj = a
        self.d = dd
        u, v = np.nonzero(np.triu(a))
        self.eu = u.astype(np.int64)
        self.ev = v.astype(np.int64)

    @classmethod
    def from_edges(cls, n: int, edges, d=None) -> "URegGraph":
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if adj[i, j]:
                raise ValueError(f"duplicate edge ({i}, {j})")
            adj[i, j] = adj[j, i] = 1
        return cls(adj, d)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adj[i])

    def edges(self):
        return list(zip(self.eu.tolist(), self.ev.tolist()))

    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.adj, dtype=float)

    def __eq__(self, other):
        return isinstance(other, URegGraph) and np.array_equal(self.adj, other.adj)

    def __repr__(self):
        return f"URegGraph(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class Interval:
    start: int
    length: int

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.length)

    def check(self, n: int):
        if self.start < 0 or self.length < 0 or self.start + self.length > n:
            raise ValueError(f"{self} does not fit in [0, {n})")


def degree_condition_check(deg: DegreeSequencePair, d: int, c0: float = C0) -> bool:
    """(1 - c0) d <= every degree <= d, and d <= (1/2 + c0) n."""
    if d < 1:
        raise ValueError("d must be >= 1")
    lo = (1.0 - c0) * d
    both = np.concatenate([deg.d_in, deg.d_out])
    return bool(np.all(both >= lo) and np.all(both <= d) and d <= (0.5 + c0) * deg.n)


def gale_ryser_feasible(deg: DegreeSequencePair) -> bool:
    """Does an n x n 0-1 matrix with row sums d_out and column sums d_in exist?"""
    r = np.sort(deg.d_out)[::-1]
    c = deg.d_in
    if r.sum() != c.sum():
        return False
    n = deg.n
    lhs = np.cumsum(r)
    # sum_j min(c_j, k) for k = 1..n via counts of column sums
    counts = np.bincount(c, minlength=n + 1)
    # number of columns with c_j >= k, for k = 1..n
    at_least = counts[::-1].cumsum()[::-1][1:]
    rhs = np.cumsum(at_least)
    return bool(np.all(lhs <= rhs))


def corner_submatrix(g: URegGraph) -> Digraph01:
    """Top-right floor(n/2) x floor(n/2) block: rows 0..h-1, the last h columns."""
    n = g.n
    if n < 2:
        raise ValueError("need n >= 2")
    h = n // 2
    return Digraph01(g.adj[:h, n - h:])


def deg_membership(u, v, d: float, delta: float) -> bool:
    """Membership of (u, v) in the Gaussian-type degree set Deg_l(d, delta).

    Requires ||u||_1 = ||v||_1 and, for every k >= 1, at most l e^{-k^2}
    entries deviating from d by more than k delta.  Beyond
    k* = min{k : l e^{-k^2} < 1} the bound forces zero exceedances, so only
    k < k* is scanned and max deviation <= k* delta is checked once.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size == 0:
        raise ValueError("u and v must be non-empty vectors of equal length")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if u.sum() != v.sum():
        return False
    ell = u.size
    kstar = 1
    while ell * math.exp(-kstar * kstar) >= 1.0:
        kstar += 1
    for w in (u, v):
        dev = np.abs(w - d)
        for k in range(1, kstar):
            if np.count_nonzero(dev > k * delta) > ell * math.exp(-k * k):
                return False
        if dev.max() > kstar * delta:
            return False
    return True


def write_graph(g, path, fmt: str = "edgelist"):
    """Write a Digraph01 or URegGraph as 1-based edge list or Matrix Market.

    ``path`` may also be an open text stream.
    """
    text = format_graph(g, fmt)
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)


def format_graph(g, fmt: str = "edgelist") -> str:
    if isinstance(g, Digraph01):
        pairs = g.edges()
        header = f"digraph {g.n}"
        mm_kind = "general"
    elif isinstance(g, URegGraph):
        pairs = g.edges()
        header = f"ugraph {g.n} {g.d}"
        mm_kind = "symmetric"
    else:
        raise TypeError(f"cannot write {type(g).__name__}")
    lines = []
    if fmt == "edgelist":
        lines.append(header)
        lines.extend(f"{i + 1} {j + 1}" for i, j in pairs)
    elif fmt == "mtx":
        lines.append(f"%%MatrixMarket matrix coordinate pattern {mm_kind}")
        lines.append(f"{g.n} {g.n} {len(pairs)}")
        # symmetric storage keeps the lower triangle
        lines.extend(
            f"{j + 1} {i + 1}" if mm_kind == "symmetric" else f"{i + 1} {j + 1}" for i, j in pairs
        )
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


def _parse_pair(tok, lineno, n):
    if len(tok) != 2:
        raise GraphFormatError(f"line {lineno}: expected 'i j', got {' '.join(tok)!r}")
    try:
        i, j = int(tok[0]), int(tok[1])
    except ValueError:
        raise GraphFormatError(f"line {lineno}: non-integer vertex in {' '.join(tok)!r}") from None
    if not (1 <= i <= n and 1 <= j <= n):
        raise GraphFormatError(f"line {lineno}: vertex out of range 1..{n}")
    return i - 1, j - 1


def read_graph(path):
    """Parse an edge-list (``digraph n`` / ``ugraph n d``) or Matrix Market file."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("line 1: empty file")
    first = lines[0].split()
    if first and first[0].startswith("%%MatrixMarket"):
        return _read_mtx(lines)
    if len(first) < 2 or first[0] not in ("digraph", "ugraph"):
        raise GraphFormatError(f"line 1: bad header {lines[0]!r}")
    kind = first[0]
    try:
        nums = [int(t) for t in first[1:]]
    except ValueError:
        raise GraphFormatError(f"line 1: bad header {lines[0]!r}") from None
    if kind == "digraph" and len(nums) != 1 or kind == "ugraph" and len(nums) != 2:
        raise GraphFormatError(f"line 1: bad header {lines[0]!r}")
    n = nums[0]
    if n < 1:
        raise GraphFormatError("line 1: n must be >= 1")
    adj = np.zeros((n, n), dtype=np.uint8)
    for lineno, line in enumerate(lines[1:], start=2):
        tok = line.split()
        if not tok:
            continue
        i, j = _parse_pair(tok, lineno, n)
        if kind == "ugraph":
            if i == j:
                raise GraphFormatError(f"line {lineno}: loop in undirected graph")
            if adj[i, j]:
                raise GraphFormatError(f"line {lineno}: duplicate edge {i + 1} {j + 1}")
            adj[i, j] = adj[j, i] = 1
        else:
            if adj[i, j]:
                raise GraphFormatError(f"line {lineno}: duplicate edge {i + 1} {j + 1}")
            adj[i, j] = 1
    if kind == "ugraph":
        d = nums[1]
        degs = adj.sum(axis=1)
        bad = np.flatnonzero(degs != d)
        if bad.size:
            raise GraphFormatError(
                f"line 1: header degree {d} but vertex {bad[0] + 1} has degree {degs[bad[0]]}"
            )
        return URegGraph(adj, d)
    return Digraph01(adj)


def _read_mtx(lines):
    banner = lines[0].split()
    if len(banner) < 5 or banner[1] != "matrix" or banner[2] != "coordinate":
        raise GraphFormatError("line 1: only coordinate Matrix Market files are supported")
    symmetric = banner[4] == "symmetric"
    idx = 1
    while idx < len(lines) and (not lines[idx].strip() or lines[idx].startswith("%")):
        idx += 1
    if idx >= len(lines):
        raise GraphFormatError(f"line {idx + 1}: missing size line")
    try:
        rows, cols, nnz = (int(t) for t in lines[idx].split())
    except ValueError:
        raise GraphFormatError(f"line {idx + 1}: bad size line") from None
    if rows != cols:
        raise GraphFormatError(f"line {idx + 1}: matrix must be square")
    n = rows
    adj = np.zeros((n, n), dtype=np.uint8)
    seen = 0
    for lineno, line in enumerate(lines[idx + 1:], start=idx + 2):
        tok = line.split()
        if not tok or tok[0].startswith("%"):
            continue
        i, j = _parse_pair(tok[:2], lineno, n)
        if adj[i, j]:
            raise GraphFormatError(f"line {lineno}: duplicate entry {i + 1} {j + 1}")
        adj[i, j] = 1
        if symmetric:
            if i == j:
                raise GraphFormatError(f"line {lineno}: loop in symmetric (undirected) matrix")
            adj[j, i] = 1
        seen += 1
    if seen != nnz:
        raise GraphFormatError(f"line {idx + 1}: header declares {nnz} entries, found {seen}")
    if symmetric:
        try:
            return URegGraph(adj)
        except ValueError as exc:
            raise GraphFormatError(f"line {idx + 1}: {exc}") from None
    return Digraph01(adj)
