"""Closed-form tail and MGF bounds: Bennett/Freedman, Bernstein, the summed
Freedman-type bound, and the Bennett-shaped linear-form bound."""
import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class MartingaleParams:
    """Difference bound M (|d_i| <= M a.s.) and quadratic-variation bound sigma2."""

    M: float
    sigma2: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if not self.sigma2 >= 0:
            raise ValueError("sigma2 must be non-negative")


@dataclass(frozen=True)
class QStats:
    """||Q||_HS^2, ||Q||_inf (max-entry norm) and the (n, d) they are used with."""

    hs2: float
    qinf: float
    n: int
    d: int

    @classmethod
    def from_matrix(cls, Q, d: int) -> "QStats":
        import numpy as np

        Q = np.asarray(Q, dtype=float)
        return cls(hs2=float(np.sum(Q * Q)), qinf=float(np.max(np.abs(Q))), n=Q.shape[0], d=d)


def h_func(t: float) -> float:
    """H(t) = (1+t) ln(1+t) - t."""
    if t < 0:
        raise ValueError("H is defined for t >= 0")
    if t < 1e-4:
        # series: t^2/2 - t^3/6 + t^4/12 - t^5/20
        return t * t * (0.5 - t * (1.0 / 6.0 - t * (1.0 / 12.0 - t / 20.0)))
    return (1.0 + t) * math.log1p(t) - t


def g_func(t: float) -> float:
    """g(t) = e^t - t - 1."""
    if t < 0:
        raise ValueError("g is defined for t >= 0")
    if t < 1e-4:
        return t * t * (0.5 + t * (1.0 / 6.0 + t / 24.0))
    if t > 709.0:
        return math.inf
    return math.expm1(t) - t


def freedman_mgf_bound(lam: float, p: MartingaleParams) -> float:
    """exp((sigma^2/M^2) g(lam M)), the bound on E exp(lam (X_m - X_0))."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    try:
        return math.exp(p.sigma2 / p.M**2 * g_func(lam * p.M))
    except OverflowError:
        return math.inf


def bennett_tail(t: float, p: MartingaleParams) -> float:
    """exp(-(sigma^2/M^2) H(M t / sigma^2)), bound on P(X_m - X_0 >= t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if p.sigma2 == 0:
        return 1.0 if t == 0 else 0.0
    return math.exp(-p.sigma2 / p.M**2 * h_func(p.M * t / p.sigma2))


def bernstein_tail(t: float, p: MartingaleParams) -> float:
    """exp(-t^2 / (2 sigma^2 + 2 M t / 3)); never below bennett_tail."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if p.sigma2 == 0:
        return 1.0 if t == 0 else 0.0
    return math.exp(-t * t / (2.0 * p.sigma2 + 2.0 * p.M * t / 3.0))


def sum_tail_bound(t: float, parts: Sequence[MartingaleParams]) -> float:
    """Tail for a sum of Freedman-type increments: Bennett with M = max M_i, sigma^2 = sum sigma_i^2."""
    if not parts:
        raise ValueError("need at least one part")
    M = max(p.M for p in parts)
    s2 = math.fsum(p.sigma2 for p in parts)
    return bennett_tail(t, MartingaleParams(M, s2))


def theoremD_bound(t: float, q: QStats, gamma: float = 1.0) -> float:
    """2 exp(-(d hs2 / (n qinf^2)) H(gamma t n qinf / (d hs2))).

    ``gamma`` is the unknown absolute constant of the linear-form inequality;
    the default 1 is a placeholder meant to be fit empirically.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    if q.qinf <= 0 or q.hs2 <= 0 or q.d <= 0 or q.n <= 0:
        raise ValueError("degenerate Q statistics")
    scale = q.d * q.hs2 / (q.n * q.qinf**2)
    arg = gamma * t * q.n * q.qinf / (q.d * q.hs2)
    return 2.0 * math.exp(-scale * h_func(arg))
