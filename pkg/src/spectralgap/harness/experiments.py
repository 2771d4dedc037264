"""Monte Carlo drivers.  Each ``run_*`` returns an ExperimentResult whose
records depend only on (config, trial index); worker count never matters."""
import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .._rng import mix_seed, numpy_rng
from ..graphcore import (
    DegreeSequencePair, Interval, corner_submatrix, deg_membership,
    degree_condition_check, gale_ryser_feasible,
)
from ..norms import shift_delta
from ..pstats import codegree_max, default_stride, ep_statistic, ratio_sweep
from ..sampler import (
    ChainConfig, DigraphChain, InfeasibleDegrees, chi_square_uniformity,
    enumerate_all, sample_digraph, sample_undirected,
)
from ..spectral import lambda_extreme, s2_digraph, sample_unit_pair
from ..tailbounds import MartingaleParams, QStats, bennett_tail, bernstein_tail, \
    freedman_mgf_bound, theoremD_bound
from .config import ExperimentConfig, GridCell
from .records import TrialRecord

Q_SALT = 0x5153_4545_44
INTERVAL_SALT = 0x494E_5456


@dataclass
class ExperimentResult:
    experiment: str
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def worker_count() -> int:
    """SGL_THREADS caps the pool; default is the CPU count."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get("SGL_THREADS")
    if raw is None or raw == "":
        return cpus
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"SGL_THREADS must be an integer, got {raw!r}")
    return max(1, min(k, cpus)) if k > 0 else 1


def _pmap(fn, items, workers=None):
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def chain_config(cfg: ExperimentConfig, edges: int, seed: int) -> ChainConfig:
    E = max(edges, 1)
    burn = int(cfg.param("burn_in_factor") * E * math.log(E + 1))
    spacing = max(1, int(cfg.param("spacing_factor") * E))
    return ChainConfig(burn, spacing, seed)


def cell_skip_reason(cell: GridCell):
    n, d = cell.n, cell.d
    if d < 1 or d > n:
        return f"d={d} outside [1, n]"
    if cell.model == "undirected" and d >= n:
        return f"no {d}-regular simple graph on {n} vertices"
    if cell.model == "undirected" and (n * d) % 2:
        return "n*d odd"
    # the degree condition governs the directed model only
    if cell.model == "digraph" and not degree_condition_check(DegreeSequencePair.regular(n, d), d):
        return "degree condition fails (d > (1/2 + c0) n)"
    return None


def _skip(cfg, cell, reason, **extra):
    return TrialRecord(cfg.experiment, cell.n, cell.d, -1, cfg.base_seed,
                       {"skip_reason": reason, **extra}, model=cell.model, kind="skip")


def _trial_seed(cfg, trial):
    return mix_seed(cfg.base_seed, trial)


# --- spectral ------------------------------------------------------------------

def _spectral_trial(args):
    cfg, cell, trial = args
    seed = _trial_seed(cfg, trial)
    n, d = cell.n, cell.d
    t0 = time.perf_counter()
    tol, restarts = cfg.param("tol"), cfg.param("restarts")
    if cell.model == "digraph":
        deg = DegreeSequencePair.regular(n, d)
        g = sample_digraph(deg, chain_config(cfg, deg.edges, seed))
        summ = s2_digraph(g, tol=tol, restarts=restarts, seed=seed)
        s1, s2 = summ.s1, summ.s2
    else:
        g = sample_undirected(n, d, chain_config(cfg, n * d // 2, seed))
        summ = lambda_extreme(g, tol=tol, restarts=restarts, seed=seed)
        s1, s2 = float(d), summ.lambda_extreme
    vu = math.sqrt(d * (1 - d / n)) if d < n else float("nan")
    stats = {"s1": s1, "s2": s2, "s2_sqrt_d": s2 / math.sqrt(d), "s2_vu": s2 / vu,
             "converged": summ.converged, "iterations": summ.iterations}
    return TrialRecord("spectral", n, d, trial, seed, stats, model=cell.model,
                       wall_time=time.perf_counter() - t0)


def run_spectral(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    res = ExperimentResult("spectral")
    max_ratio = cfg.param("max_ratio")
    lo, hi = cfg.param("median_lo"), cfg.param("median_hi")
    for cell in cfg.grid:
        reason = cell_skip_reason(cell)
        if reason:
            res.records.append(_skip(cfg, cell, reason))
            continue
        recs = _pmap(_spectral_trial, [(cfg, cell, t) for t in range(cfg.trials)], workers)
        res.records.extend(recs)
        ratios = np.array([r.stats["s2_vu"] for r in recs])
        q10, med, q90 = np.quantile(ratios, [0.1, 0.5, 0.9])
        res.records.append(TrialRecord("spectral", cell.n, cell.d, -1, cfg.base_seed, {
            "q10": float(q10), "median": float(med), "q90": float(q90),
            "max": float(ratios.max())}, model=cell.model, kind="summary"))
        for r in recs:
            if not np.isfinite(r.stats["s2_vu"]):
                res.failures.append(f"non-finite ratio at n={cell.n} d={cell.d} seed={r.seed}")
            if max_ratio is not None and r.stats["s2_vu"] > max_ratio:
                res.failures.append(
                    f"s2/sqrt(d(1-d/n)) = {r.stats['s2_vu']:.4f} > {max_ratio} "
                    f"(n={cell.n}, d={cell.d}, model={cell.model}, seed={r.seed})")
        if lo is not None and med < lo or hi is not None and med > hi:
            res.failures.append(
                f"median s2/sqrt(d(1-d/n)) = {med:.4f} outside [{lo}, {hi}] (n={cell.n}, d={cell.d})")
    return res


# --- concentration -------------------------------------------------------------

def make_q(kind: str, n: int, d: int, seed: int) -> np.ndarray:
    rng = numpy_rng(seed)
    if kind == "zero":
        return np.zeros((n, n))
    if kind == "ones":
        return np.ones((n, n))
    if kind in ("rank-one", "rank-one-light"):
        x, y = sample_unit_pair(n, rng)
        Q = np.outer(x, y)
        if kind == "rank-one-light":
            Q[np.abs(Q) > math.sqrt(d) / n] = 0.0
        return Q
    if kind == "random-sign":
        return rng.choice([-1.0, 1.0], size=(n, n)) / n
    if kind == "block":
        Q = np.zeros((n, n))
        S = rng.choice(n, max(1, n // 4), replace=False)
        T = rng.choice(n, max(1, n // 4), replace=False)
        Q[np.ix_(S, T)] = 1.0
        return Q / np.linalg.norm(Q)
    raise ValueError(f"unknown Q generator {kind!r}")


def _concentration_block(args):
    cfg, cell, block, first, count, Q = args
    seed = mix_seed(cfg.base_seed, block)
    n, d = cell.n, cell.d
    deg = DegreeSequencePair.regular(n, d)
    chain = DigraphChain(deg, chain_config(cfg, deg.edges, seed))
    centre = d / n * float(Q.sum())
    L = cfg.param("condition_L")
    c0 = cfg.param("condition_c0")
    out = []
    for pos in range(count):
        t0 = time.perf_counter()
        chain.advance()
        Z = float(Q[chain.src, chain.dst].sum()) - centre
        ep_pass = None
        if L is not None:
            g = chain.view()
            ep_pass = bool(ep_statistic(g, c0, default_stride(n)) <= L)
        out.append((first + pos, seed, pos, Z, ep_pass, time.perf_counter() - t0))
    return out


def run_concentration(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Chains are run in blocks of ``chain_block`` spaced samples; trial t
    belongs to block t // chain_block and is replayed from that block's seed."""
    res = ExperimentResult("concentration")
    B = int(cfg.param("chain_block"))
    gamma = float(cfg.param("gamma"))
    kind = cfg.param("q")
    for ci, cell in enumerate(cfg.grid):
        reason = cell_skip_reason(cell)
        if cell.model != "digraph":
            reason = reason or "concentration runs on the directed model"
        if reason:
            res.records.append(_skip(cfg, cell, reason))
            continue
        n, d = cell.n, cell.d
        q_seed = mix_seed(cfg.base_seed ^ Q_SALT, ci)
        Q = make_q(kind, n, d, q_seed)
        hs = float(np.linalg.norm(Q))
        scale = math.sqrt(d) * hs
        jobs = []
        for b, first in enumerate(range(0, cfg.trials, B)):
            jobs.append((cfg, cell, b, first, min(B, cfg.trials - first), Q))
        rows = [r for blk in _pmap(_concentration_block, jobs, workers) for r in blk]
        Zs = []
        for trial, seed, pos, Z, ep_pass, wt in rows:
            zn = Z / scale if scale > 0 else 0.0
            res.records.append(TrialRecord("concentration", n, d, trial, seed, {
                "chain_pos": pos, "Z": Z, "z_norm": zn, "hs": hs, "ep_pass": ep_pass},
                model=cell.model, wall_time=wt))
            if ep_pass is None or ep_pass:
                Zs.append(Z)
        Zs = np.array(Zs)
        kept = Zs.size
        filter_rate = kept / len(rows)
        std = float(np.std(Zs / scale)) if scale > 0 and kept else 0.0
        sd = shift_delta(Q, d)
        ssum = d * d / (n * n) * float(Q.sum())
        qs = QStats.from_matrix(Q, d) if hs > 0 else None
        base = {"hs": hs, "std": std, "shift_delta": sd, "shift_sum": ssum,
                "filter_rate": filter_rate}
        exceed_at = {}
        for tm in cfg.param("t_multiples"):
            t = tm * scale
            freq = float(np.mean(np.abs(Zs) > t)) if kept else 0.0
            exceed_at[tm] = freq
            bound = theoremD_bound(t, qs, gamma) if qs is not None else 0.0
            res.records.append(TrialRecord("concentration", n, d, -1, q_seed, {
                **base, "t_mult": tm, "exceed_freq": freq, "theoremD_bound": bound},
                model=cell.model, kind="summary"))
        res.diagnostics[(n, d)] = {"std": std, "exceed": exceed_at, "filter_rate": filter_rate,
                                   "shift_delta": sd, "shift_sum": ssum}
        max_exceed, at = cfg.param("max_exceed"), cfg.param("max_exceed_at")
        if max_exceed is not None and kept:
            freq = float(np.mean(np.abs(Zs) > at * scale))
            if freq > max_exceed:
                worst = max(rows, key=lambda r: abs(r[3]))
                res.failures.append(
                    f"P(|Z| > {at} sqrt(d)||Q||_HS) = {freq:.4g} > {max_exceed} "
                    f"(n={n}, d={d}; largest |Z| at block seed={worst[1]}, chain_pos={worst[2]})")
        max_std = cfg.param("max_std")
        if max_std is not None and std > max_std:
            res.failures.append(f"std of Z/(sqrt(d)||Q||_HS) = {std:.4g} > {max_std} "
                                f"(n={n}, d={d}, base_seed={cfg.base_seed})")
    return res


# --- freedman --------------------------------------------------------------------

def martingale_endpoints(steps: str, m: int, runs: int, seed: int) -> np.ndarray:
    rng = numpy_rng(seed)
    if steps == "rademacher":
        return 2.0 * rng.binomial(m, 0.5, size=runs) - m
    if steps == "uniform":
        return rng.uniform(-1.0, 1.0, size=(runs, m)).sum(axis=1)
    if steps == "zero":
        return np.zeros(runs)
    raise ValueError(f"unknown step law {steps!r}")


def step_params(steps: str, m: int) -> MartingaleParams:
    var = {"rademacher": 1.0, "uniform": 1.0 / 3.0, "zero": 0.0}[steps]
    return MartingaleParams(1.0, var * m)


def run_freedman(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Runs are drawn in chunks; chunk c uses seed mix(base_seed, c)."""
    res = ExperimentResult("freedman")
    steps, m = cfg.param("steps"), int(cfg.param("m"))
    chunk = int(cfg.param("chunk"))
    k = float(cfg.param("se_mult"))
    p = step_params(steps, m)
    X = np.concatenate([
        martingale_endpoints(steps, m, min(chunk, cfg.trials - first), mix_seed(cfg.base_seed, c))
        for c, first in enumerate(range(0, cfg.trials, chunk))
    ])
    R = X.size
    for t in cfg.param("t_grid"):
        emp = float(np.mean(X >= t))
        se = math.sqrt(emp * (1 - emp) / R)
        bound = bennett_tail(t, p)
        ok = emp <= bound + k * se
        res.records.append(TrialRecord("freedman", 0, 0, -1, cfg.base_seed, {
            "m": m, "t": t, "empirical": emp, "mc_se": se, "bound": bound,
            "bernstein": bernstein_tail(t, p), "ok": ok}, model=steps, kind="tail"))
        if not ok:
            res.failures.append(f"P(X_m >= {t}) = {emp:.4g} > bennett {bound:.4g} + {k} se "
                                f"({se:.3g}) (base_seed={cfg.base_seed})")
    for lam in cfg.param("lambda_grid"):
        vals = np.exp(lam * X)
        emp = float(vals.mean())
        se = float(vals.std() / math.sqrt(R))
        bound = freedman_mgf_bound(lam, p)
        ok = emp <= bound + k * se
        res.records.append(TrialRecord("freedman", 0, 0, -1, cfg.base_seed, {
            "m": m, "lam": lam, "empirical": emp, "mc_se": se, "bound": bound, "ok": ok},
            model=steps, kind="mgf"))
        if not ok:
            res.failures.append(f"E exp({lam} X_m) = {emp:.6g} > MGF bound {bound:.6g} + {k} se "
                                f"(base_seed={cfg.base_seed})")
    return res


# --- codegree / ep -------------------------------------------------------------------

def _codegree_trial(args):
    cfg, cell, trial = args
    seed = _trial_seed(cfg, trial)
    n, d = cell.n, cell.d
    t0 = time.perf_counter()
    deg = DegreeSequencePair.regular(n, d)
    g = sample_digraph(deg, chain_config(cfg, deg.edges, seed))
    length = int(math.floor(cfg.param("c0") * n))
    start = int(numpy_rng(mix_seed(seed, INTERVAL_SALT)).integers(0, n - length + 1))
    empty = codegree_max(g)
    inter = codegree_max(g, Interval(start, length))
    thr = cfg.param("threshold") * d
    stats = {"interval_start": start, "interval_len": length, "codegree_empty": empty,
             "codegree_interval": inter, "threshold": thr, "ok": max(empty, inter) < thr}
    return TrialRecord("codegree", n, d, trial, seed, stats, model=cell.model,
                       wall_time=time.perf_counter() - t0)


def run_codegree(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    res = ExperimentResult("codegree")
    for cell in cfg.grid:
        reason = cell_skip_reason(cell)
        if reason:
            res.records.append(_skip(cfg, cell, reason))
            continue
        recs = _pmap(_codegree_trial, [(cfg, cell, t) for t in range(cfg.trials)], workers)
        res.records.extend(recs)
        for r in recs:
            if not r.stats["ok"]:
                worst = max(r.stats["codegree_empty"], r.stats["codegree_interval"])
                res.failures.append(f"codegree {worst} >= {r.stats['threshold']:.4g} "
                                    f"(n={cell.n}, d={cell.d}, seed={r.seed})")
    return res


def _ep_trial(args):
    cfg, cell, trial = args
    seed = _trial_seed(cfg, trial)
    n, d = cell.n, cell.d
    deg = DegreeSequencePair.regular(n, d)
    g = sample_digraph(deg, chain_config(cfg, deg.edges, seed))
    stride = cfg.param("stride") or default_stride(n)
    out = []
    for c0 in cfg.param("c0_values"):
        t0 = time.perf_counter()
        val = ep_statistic(g, c0, stride)
        out.append(TrialRecord("ep", n, d, trial, seed, {
            "c0": c0, "stride": stride, "statistic": val, "finite": bool(np.isfinite(val))},
            model=cell.model, wall_time=time.perf_counter() - t0))
    return out


def run_ep(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    res = ExperimentResult("ep")
    cap, cap_c0 = cfg.param("cap"), cfg.param("cap_c0")
    for cell in cfg.grid:
        reason = cell_skip_reason(cell)
        if reason:
            res.records.append(_skip(cfg, cell, reason))
            continue
        batches = _pmap(_ep_trial, [(cfg, cell, t) for t in range(cfg.trials)], workers)
        for recs in batches:
            for r in recs:
                val = r.stats["statistic"]
                ok = bool(np.isfinite(val))
                if cap is not None and math.isclose(r.stats["c0"], cap_c0):
                    ok = ok and val <= cap
                r.stats["ok"] = ok
                if not ok:
                    res.failures.append(f"ep statistic {val!r} (c0={r.stats['c0']}) exceeds cap "
                                        f"{cap} or is not finite (n={cell.n}, d={cell.d}, seed={r.seed})")
                res.records.append(r)
    return res


# --- corner ------------------------------------------------------------------------

def _corner_trial(args):
    cfg, cell, trial = args
    seed = _trial_seed(cfg, trial)
    n, d = cell.n, cell.d
    t0 = time.perf_counter()
    tol, restarts = cfg.param("tol"), cfg.param("restarts")
    G = sample_undirected(n, d, chain_config(cfg, n * d // 2, seed))
    T = corner_submatrix(G)
    member = deg_membership(T.d_in, T.d_out, d / 2, cfg.param("C_deg") * math.sqrt(d))
    s2c = s2_digraph(T, tol=tol, restarts=restarts, seed=seed).s2
    lam = lambda_extreme(G, tol=tol, restarts=restarts, seed=seed).lambda_extreme
    stats = {"member": member, "s2_corner": s2c, "s2_corner_ratio": s2c / math.sqrt(d / 2),
             "lambda_extreme": lam, "lambda_ratio": lam / math.sqrt(d)}
    return TrialRecord("corner", n, d, trial, seed, stats, model="undirected",
                       wall_time=time.perf_counter() - t0)


def run_corner(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    res = ExperimentResult("corner")
    min_rate, max_ratio = cfg.param("min_member_rate"), cfg.param("max_ratio")
    for cell in cfg.grid:
        cell = GridCell(cell.n, cell.d, "undirected")
        reason = cell_skip_reason(cell)
        if reason:
            res.records.append(_skip(cfg, cell, reason))
            continue
        recs = _pmap(_corner_trial, [(cfg, cell, t) for t in range(cfg.trials)], workers)
        res.records.extend(recs)
        rate = float(np.mean([r.stats["member"] for r in recs]))
        res.records.append(TrialRecord("corner", cell.n, cell.d, -1, cfg.base_seed,
                                       {"member_rate": rate}, model="undirected", kind="summary"))
        res.diagnostics[(cell.n, cell.d)] = {"member_rate": rate}
        if min_rate is not None and rate < min_rate:
            bad = [r.seed for r in recs if not r.stats["member"]]
            res.failures.append(f"Deg membership rate {rate:.3f} < {min_rate} "
                                f"(n={cell.n}, d={cell.d}; failing seeds {bad[:5]})")
        for r in recs:
            if max_ratio is not None and r.stats["s2_corner_ratio"] > max_ratio:
                res.failures.append(f"s2(T)/sqrt(d/2) = {r.stats['s2_corner_ratio']:.4f} > "
                                    f"{max_ratio} (n={cell.n}, d={cell.d}, seed={r.seed})")
    return res


# --- oracle drivers ------------------------------------------------------------------

def run_uniformity(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """One chain per cell (seed mix(base_seed, cell index)); ``trials`` samples."""
    res = ExperimentResult("uniformity")
    p_min = cfg.param("p_min")
    for ci, cell in enumerate(cfg.grid):
        if cell.model != "digraph":
            res.records.append(_skip(cfg, cell, "uniformity oracle covers the directed model"))
            continue
        deg = DegreeSequencePair.regular(cell.n, cell.d)
        try:
            universe = enumerate_all(deg)
        except (ValueError, InfeasibleDegrees) as exc:
            res.records.append(_skip(cfg, cell, str(exc)))
            continue
        index = {g.key(): i for i, g in enumerate(universe)}
        seed = mix_seed(cfg.base_seed, ci)
        chain = DigraphChain(deg, ChainConfig(int(cfg.param("burn_in")), int(cfg.param("spacing")), seed))
        counts = np.zeros(len(universe), dtype=np.int64)
        for _ in range(cfg.trials):
            counts[index[chain.next().key()]] += 1
        if len(universe) < 2:
            chi2, pval = 0.0, 1.0
        else:
            chi2, pval = chi_square_uniformity(counts)
        ok = pval > p_min
        res.records.append(TrialRecord("uniformity", cell.n, cell.d, -1, seed, {
            "cells": len(universe), "samples": cfg.trials, "chi2": chi2, "p_value": pval, "ok": ok},
            model=cell.model, kind="summary"))
        if not ok:
            res.failures.append(f"chi-square p = {pval:.3g} <= {p_min} over {len(universe)} cells "
                                f"(n={cell.n}, d={cell.d}, seed={seed})")
    return res


def degree_pairs(n: int):
    """All feasible (d_in, d_out) pairs on n vertices."""
    vecs = list(itertools.product(range(n + 1), repeat=n))
    for a in vecs:
        for b in vecs:
            if sum(a) != sum(b):
                continue
            deg = DegreeSequencePair(np.array(a), np.array(b))
            if gale_ryser_feasible(deg):
                yield deg


def run_ratio_identity(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Grid cells give n (d is ignored); every feasible degree pair is swept."""
    res = ExperimentResult("ratio-identity")
    for n in sorted({cell.n for cell in cfg.grid}):
        configs = rows = bad = bad_disp = 0
        first_bad = None
        for deg in degree_pairs(n):
            last = None
            for m, prefix, v, vp, k, l, row in ratio_sweep(deg):
                key = (m, prefix, v, k, l)
                if key != last:
                    configs += 1
                    last = key
                rows += 1
                if not row.ok:
                    bad += 1
                    first_bad = first_bad or (deg, key, row)
                bad_disp += not row.ok_as_displayed
        res.records.append(TrialRecord("ratio-identity", n, -1, -1, cfg.base_seed, {
            "configs": configs, "rows": rows, "violations": bad,
            "violations_as_displayed": bad_disp}, model="digraph", kind="summary"))
        res.diagnostics[n] = {"rows": rows, "violations": bad, "violations_as_displayed": bad_disp}
        if bad:
            deg, key, row = first_bad
            res.failures.append(f"count_v(r)(p_l - r) != count_v'(r)(p_k - r) at n={n}: "
                                f"{deg!r}, config {key}, {row}")
    return res


RUNNERS = {
    "spectral": run_spectral,
    "concentration": run_concentration,
    "freedman": run_freedman,
    "codegree": run_codegree,
    "ep": run_ep,
    "corner": run_corner,
    "uniformity": run_uniformity,
    "ratio-identity": run_ratio_identity,
}


def run(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg, workers)
