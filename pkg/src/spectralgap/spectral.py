"""Singular values and extreme eigenvalues.

Dense path: one-sided Jacobi SVD (reference, n <= DENSE_CAP).  Matrix-free
path: block power (subspace) iteration with Rayleigh-Ritz, operators applied
through the sparse row supports.  The second singular value comes from the
deflated operator (top right-singular vector projected out) and, for
exactly regular graphs, also from the centered operator M - (d/n) 1 1^T.
"""
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from ._rng import mix_seed, numpy_rng
from .graphcore import Digraph01, URegGraph

DENSE_CAP = 512
DEFAULT_TOL = 1e-8
DEFAULT_RESTARTS = 3
MAX_ITER = 10_000
BLOCK = 8
STABLE_WINDOW = 3


@dataclass
class SpectralSummary:
    s1: float
    s2: float
    lambda_extreme: float = float("nan")
    iterations: int = 0
    converged: bool = False
    s2_deflated: float = float("nan")
    s2_shifted: float = float("nan")
    top_overlap: float = float("nan")
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "s1": self.s1,
            "s2": self.s2,
            "lambda_extreme": self.lambda_extreme,
            "converged": self.converged,
            "iterations": self.iterations,
        }


# --- dense reference ---------------------------------------------------------

@njit(cache=True)
def _jacobi_sweeps(U, eps, max_sweeps):
    n_rows, n_cols = U.shape
    # columns below eps * ||U||_F are numerically zero; rotating them only churns noise
    floor = eps * eps * np.sum(U * U)
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n_cols - 1):
            for q in range(p + 1, n_cols):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(n_rows):
                    a = U[r, p]
                    b = U[r, q]
                    alpha += a * a
                    beta += b * b
                    gamma += a * b
                if gamma == 0.0 or alpha <= floor or beta <= floor:
                    continue
                if abs(gamma) <= eps * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                sign = 1.0 if zeta >= 0.0 else -1.0
                t = sign / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for r in range(n_rows):
                    a = U[r, p]
                    b = U[r, q]
                    U[r, p] = c * a - s * b
                    U[r, q] = s * a + c * b
        if not rotated:
            return sweep + 1
    return -1


def dense_singular_values(Q, cap: int = DENSE_CAP) -> np.ndarray:
    """All singular values, descending, by one-sided (Hestenes) Jacobi."""
    U = np.array(Q, dtype=float, copy=True)
    if U.ndim != 2:
        raise ValueError("expected a matrix")
    if max(U.shape) > cap:
        raise ValueError(f"dense solver capped at n={cap}, got {U.shape}")
    sweeps = _jacobi_sweeps(U, 1e-15, 100)
    if sweeps < 0:
        raise ArithmeticError("Jacobi SVD did not converge in 100 sweeps")
    return np.sort(np.sqrt(np.sum(U * U, axis=0)))[::-1]


# --- block power iteration ---------------------------------------------------

@dataclass
class _Ritz:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool


def _orth(X, project):
    if project is not None:
        X = project(X)
    Q, _ = np.linalg.qr(X)
    return Q


def _block_power(apply: Callable, n: int, rng, *, project=None, block=BLOCK,
                 tol=DEFAULT_TOL, max_iter=MAX_ITER, by_magnitude=False,
                 resid_tol=None) -> _Ritz:
    """Dominant Ritz pair of a symmetric operator by subspace iteration.

    Converged once the leading Ritz value changes by less than ``tol``
    (relative) for STABLE_WINDOW consecutive steps and, if ``resid_tol`` is
    set, the Ritz residual is below ``resid_tol`` times the value.
    """
    b = max(1, min(block, n - (1 if project is not None else 0)))
    X = _orth(rng.standard_normal((n, b)), project)
    prev = None
    stable = 0
    best = None
    for it in range(1, max_iter + 1):
        Y = apply(X)
        if project is not None:
            Y = project(Y)
        T = X.T @ Y
        T = 0.5 * (T + T.T)
        w, V = np.linalg.eigh(T)
        k = int(np.argmax(np.abs(w))) if by_magnitude else int(np.argmax(w))
        theta = float(w[k])
        z = X @ V[:, k]
        best = (theta, z)
        ok = False
        if prev is not None:
            scale = max(abs(theta), 1e-300)
            stable = stable + 1 if abs(theta - prev) <= tol * scale else 0
            ok = stable >= STABLE_WINDOW
            if ok and resid_tol is not None:
                r = Y @ V[:, k] - theta * z
                ok = np.linalg.norm(r) <= resid_tol * scale
            if ok or abs(theta) == 0.0:
                return _Ritz(abs(theta) if by_magnitude else theta, z, it, True)
        prev = theta
        # rotate toward Ritz vectors so the block stays well separated
        X = _orth(Y @ V, project)
    theta, z = best
    return _Ritz(abs(theta) if by_magnitude else theta, z, max_iter, False)


def _gram_ops(g: Digraph01):
    M = g.csr()
    MT = M.T.tocsr()
    return M, MT


def s2_digraph(g: Digraph01, tol: float = DEFAULT_TOL, restarts: int = DEFAULT_RESTARTS,
               seed: int = 0, block: int = BLOCK, max_iter: int = MAX_ITER) -> SpectralSummary:
    """s1, s2 of a 0-1 matrix by deflated block power iteration on M^T M."""
    n = g.n
    if g.num_edges == 0:
        return SpectralSummary(0.0, 0.0, iterations=0, converged=True, s2_deflated=0.0)
    if n == 1:
        return SpectralSummary(1.0, 0.0, converged=True, s2_deflated=0.0, top_overlap=1.0)
    M, MT = _gram_ops(g)

    def gram(X):
        return MT @ (M @ X)

    best_top = None
    s2_defl = 0.0
    iterations = 0
    converged = True
    for r in range(max(1, restarts)):
        rng = numpy_rng(mix_seed(seed, r))
        top = _block_power(gram, n, rng, block=block, tol=tol * 1e-4, max_iter=max_iter,
                           resid_tol=1e-10)
        iterations += top.iterations
        converged &= top.converged
        if best_top is None or top.value > best_top.value:
            best_top = top
        v1 = top.vector / np.linalg.norm(top.vector)

        def project(X, v1=v1):
            return X - np.outer(v1, v1 @ X)

        defl = _block_power(gram, n, rng, project=project, block=block, tol=tol,
                            max_iter=max_iter)
        iterations += defl.iterations
        converged &= defl.converged
        s2_defl = max(s2_defl, math.sqrt(max(defl.value, 0.0)))

    s1 = math.sqrt(max(best_top.value, 0.0))
    v1 = best_top.vector / np.linalg.norm(best_top.vector)
    overlap = abs(float(v1.sum())) / math.sqrt(n)
    out = SpectralSummary(s1, s2_defl, iterations=iterations, converged=converged,
                          s2_deflated=s2_defl, top_overlap=overlap)

    d = g.is_regular()
    if d is not None:
        shift = d / n

        def centered_gram(X):
            MX = M @ X - shift * X.sum(axis=0)[None, :]
            return MT @ MX - shift * MX.sum(axis=0)[None, :]

        s2_shift = 0.0
        for r in range(max(1, restarts)):
            rng = numpy_rng(mix_seed(seed, 1000 + r))
            res = _block_power(centered_gram, n, rng, block=block, tol=tol, max_iter=max_iter)
            iterations += res.iterations
            out.converged &= res.converged
            s2_shift = max(s2_shift, math.sqrt(max(res.value, 0.0)))
        out.s2_shifted = s2_shift
        out.s2 = max(s2_defl, s2_shift)
        out.iterations = iterations
        if abs(s2_defl - s2_shift) > 1e-6 * max(s2_shift, 1e-12):
            out.flags.append("deflated/shifted disagreement")
    if s1 - out.s2 <= tol * max(s1, 1.0):
        out.flags.append("s1~s2 degenerate: deflation ill-conditioned")
    if not out.converged:
        out.flags.append("not converged")
    return out


def lambda_extreme(g: URegGraph, tol: float = DEFAULT_TOL, restarts: int = DEFAULT_RESTARTS,
                   seed: int = 0, block: int = BLOCK, max_iter: int = MAX_ITER) -> SpectralSummary:
    """max(|lambda_2|, |lambda_n|) = ||A - (d/n) 1 1^T|| for a d-regular graph."""
    n, d = g.n, g.d
    A = g.csr()
    shift = d / n

    def centered(X):
        return A @ X - shift * X.sum(axis=0)[None, :]

    lam = 0.0
    iterations = 0
    converged = True
    for r in range(max(1, restarts)):
        rng = numpy_rng(mix_seed(seed, r))
        res = _block_power(centered, n, rng, block=block, tol=tol, max_iter=max_iter,
                           by_magnitude=True)
        iterations += res.iterations
        converged &= res.converged
        lam = max(lam, res.value)
    out = SpectralSummary(float(d), lam, lambda_extreme=lam, iterations=iterations,
                          converged=converged)
    if not converged:
        out.flags.append("not converged")
    return out


def bilinear_form(g: Digraph01, x, y) -> float:
    """<M y, x> = sum over ones M_ij of x_i y_j."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (g.n,) or y.shape != (g.n,):
        raise ValueError(f"vectors must have shape ({g.n},)")
    return float(x @ (g.csr() @ y))


def sample_unit_pair(n: int, rng):
    """x uniform on S^{n-1}; y uniform on the unit sphere of the sum-zero hyperplane."""
    if n < 2:
        raise ValueError("need n >= 2")
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    y = rng.standard_normal(n)
    y -= y.mean()
    y /= np.linalg.norm(y)
    # one more centering pass pins the sum near machine precision
    y -= y.mean()
    y /= np.linalg.norm(y)
    return x, y
