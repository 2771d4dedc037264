"""Acceptance criteria 1-15.  Each test reports a pass/fail line (shown in
the terminal summary) before asserting.  Monte Carlo criteria read their
frozen parameters from configs/acceptance.toml."""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from spectralgap._rng import mix_seed, numpy_rng
from spectralgap.discrepancy import couple_split_sums, heavy_certificate
from spectralgap.graphcore import DegreeSequencePair, Digraph01
from spectralgap.harness import load_config, run
from spectralgap.norms import log_norm, psi_norm
from spectralgap.sampler import ChainConfig, count_all, enumerate_all, sample_digraph
from spectralgap.spectral import bilinear_form, dense_singular_values, s2_digraph, sample_unit_pair
from spectralgap.tailbounds import MartingaleParams, bennett_tail, bernstein_tail, h_func

from acceptance_log import report
from oracles import count_by_column_profile

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "acceptance.toml"
SOLVER_REL = 1e-10


def run_config(name):
    return run(load_config(CONFIG, name))


def test_c01_exact_enumeration():
    t0 = time.perf_counter()
    n3 = len(enumerate_all(DegreeSequencePair.regular(3, 2)))
    n4 = len(enumerate_all(DegreeSequencePair.regular(4, 2)))
    dp = count_by_column_profile((2,) * 4, (2,) * 4)
    elapsed = time.perf_counter() - t0
    ok = n3 == 6 and n4 == 90 == dp == count_all(DegreeSequencePair.regular(4, 2)) and elapsed < 1.0
    report(1, "exact enumeration", ok, f"n=3: {n3}, n=4: {n4} (DP {dp}), {elapsed:.3f}s")
    assert ok


def test_c02_sampler_uniformity():
    t0 = time.perf_counter()
    res = run_config("uniformity")
    elapsed = time.perf_counter() - t0
    rec = res.records[0].stats
    ok = res.ok and rec["cells"] == 90 and rec["samples"] == 90_000 and elapsed < 60
    report(2, "switch-chain uniformity", ok,
           f"chi2={rec['chi2']:.1f} over {rec['cells']} cells, p={rec['p_value']:.3g}, {elapsed:.1f}s")
    assert ok, res.failures


def test_c03_regular_top_pair():
    worst_s1 = 0.0
    worst_overlap = 1.0
    count = 0
    for n in (64, 128, 256):
        for d in (3, 16, n // 2):
            for t in range(3):
                seed = mix_seed(3003, count)
                g = sample_digraph(DegreeSequencePair.regular(n, d), ChainConfig.default(n * d, seed))
                out = s2_digraph(g, seed=seed)
                worst_s1 = max(worst_s1, abs(out.s1 - d) / d)
                worst_overlap = min(worst_overlap, out.top_overlap)
                count += 1
    ok = worst_s1 <= 1e-8 and worst_overlap >= 1 - 1e-8
    report(3, "regular top singular pair", ok,
           f"{count} digraphs, max |s1-d|/d={worst_s1:.2e}, min overlap=1-{1 - worst_overlap:.2e}")
    assert ok


def test_c04_solver_cross_check():
    rng = numpy_rng(4004)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(8, 65))
        if i % 2:
            d = int(rng.integers(1, n // 2 + 1))
            g = sample_digraph(DegreeSequencePair.regular(n, d), ChainConfig.default(n * d, mix_seed(4004, i)))
        else:
            g = Digraph01((rng.random((n, n)) < rng.uniform(0.05, 0.6)).astype(np.uint8))
        out = s2_digraph(g, seed=i)
        ref = dense_singular_values(g.adj.astype(float))[1]
        worst = max(worst, abs(out.s2_deflated - ref) / max(ref, 1e-300))
    ok = worst <= 1e-6
    report(4, "deflated s2 vs dense reference", ok, f"100 instances, max rel err={worst:.2e}")
    assert ok


@pytest.mark.slow
def test_c05_spectral_gap_scaling():
    t0 = time.perf_counter()
    res = run_config("spectral")
    elapsed = time.perf_counter() - t0
    summ = [r for r in res.records if r.kind == "summary"]
    worst = max(r.stats["max"] for r in summ)
    meds = ", ".join(f"{r.n}/{r.d}:{r.stats['median']:.2f}" for r in summ)
    ok = res.ok and len(summ) == 9 and elapsed <= 30 * 60
    report(5, "spectral gap scaling", ok, f"max ratio={worst:.3f}; medians {meds}; {elapsed:.0f}s")
    assert ok, res.failures


@pytest.fixture(scope="module")
def heavy_trials():
    n, d, K = 256, 16, 8.0
    deg = DegreeSequencePair.regular(n, d)
    out = []
    for t in range(1000):
        seed = mix_seed(6006, t)
        g = sample_digraph(deg, ChainConfig.default(deg.edges, seed))
        x, y = sample_unit_pair(n, numpy_rng(mix_seed(seed, 1)))
        cert = heavy_certificate(g, x, y, K, K, d)
        out.append((g, x, y, cert))
    return out


def test_c06_heavy_couple_implication(heavy_trials):
    passing = [c for *_, c in heavy_trials if c.all_pass]
    violations = sum(abs(c.heavy_sum) > c.bound for c in passing)
    ok = violations == 0
    report(6, "heavy-couple implication", ok,
           f"{len(heavy_trials)} trials, certified {len(passing)} "
           f"({100 * len(passing) / len(heavy_trials):.1f}%), violations {violations}")
    assert ok


def test_c07_decomposition_identity(heavy_trials):
    worst = 0.0
    for g, x, y, cert in heavy_trials:
        light, heavy = couple_split_sums(g, x, y, 16)
        b = bilinear_form(g, x, y)
        # relative to the size of the summands, so cancellation near b = 0 is not amplified
        worst = max(worst, abs(light + heavy - b) / max(abs(b), abs(light) + abs(heavy)))
        assert light == cert.light_sum and heavy == cert.heavy_sum
    ok = worst <= 1e-10
    report(7, "light + heavy = bilinear form", ok, f"max rel err={worst:.2e}")
    assert ok


def test_c08_tail_functions():
    h_one = h_func(math.e - 1)
    grid = np.linspace(0.0, 100.0, 10_000)
    lower_ok = all(h_func(t) >= t * t / (2 * (1 + t / 3)) - 1e-12 for t in grid)
    order_ok = True
    for M in (0.1, 1.0, 10.0):
        for s2 in (0.01, 1.0, 100.0):
            p = MartingaleParams(M, s2)
            order_ok &= all(bennett_tail(t, p) <= bernstein_tail(t, p) * (1 + 1e-12)
                            for t in np.linspace(0, 200, 400))
    ok = abs(h_one - 1) <= 1e-12 and lower_ok and order_ok
    report(8, "tail-function exactness", ok,
           f"|H(e-1)-1|={abs(h_one - 1):.1e}, H lower bound {lower_ok}, bennett<=bernstein {order_ok}")
    assert ok


def norm_vectors(n, count, seed):
    rng = numpy_rng(seed)
    for i in range(count):
        kind = i % 4
        if kind == 0:
            x = rng.standard_normal(n)
        elif kind == 1:
            x = rng.standard_cauchy(n)
        elif kind == 2:
            x = rng.standard_normal(n) * (rng.random(n) < 0.1)
            x[rng.integers(n)] = rng.standard_normal()
        else:
            x = rng.exponential(size=n) * rng.choice([-1, 1], n)
        yield x * 10.0 ** rng.uniform(-3, 3)


def sandwich_slack(x):
    """Relative excess of each side of the two sandwiches (<= 0 means it holds)."""
    n = x.size
    psi, lg = psi_norm(x), log_norm(x)
    inf, one = np.abs(x).max(), np.abs(x).sum()
    return {
        "psi<=inf": psi / inf - 1,
        "inf<=ln(en)psi": inf / (math.log(math.e * n) * psi) - 1,
        "one<=en log": one / (math.e * n * lg) - 1,
        "n/ln n log<=one": n / math.log(n) * lg / one - 1,
    }


def test_c09_norm_sandwiches():
    worst = {}
    for n in (2, 17, 256):
        for x in norm_vectors(n, 1000, 9000 + n):
            for key, v in sandwich_slack(x).items():
                if key == "n/ln n log<=one" and n == 2:
                    continue  # checked separately below
                worst[key] = max(worst.get(key, -math.inf), v)
    ok = all(v <= SOLVER_REL for v in worst.values())
    report(9, "norm sandwiches, n in {2,17,256}, except log-1 left side at n=2", ok,
           ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()))
    assert ok


@pytest.mark.xfail(strict=True, reason="n/ln n ||x||_log <= ||x||_1 is false at n=2; "
                                       "x=(0,1) gives 2/ln2 * ||x||_log = 1.23005")
def test_c09_log_one_left_side_at_n2():
    bad = sum(sandwich_slack(x)["n/ln n log<=one"] > SOLVER_REL for x in norm_vectors(2, 1000, 9002))
    e1 = sandwich_slack(np.array([0.0, 1.0]))["n/ln n log<=one"] + 1
    report(9, "log-1 left side at n=2", bad == 0,
           f"{bad}/1000 vectors violate; x=(0,1) gives ratio {e1:.5f}")
    assert bad == 0


def test_c10_switching_ratio_identity():
    res = run_config("ratio-identity")
    rows = {r.n: r.stats for r in res.records}
    total = sum(s["rows"] for s in rows.values())
    bad = sum(s["violations"] for s in rows.values())
    ok = res.ok and bad == 0 and sorted(rows) == [1, 2, 3, 4] and rows[4]["rows"] > 0
    report(10, "switching ratio identity, n<=4", ok,
           f"{total} (config, r) rows, violations {bad}; "
           f"swapped orientation fails {sum(s['violations_as_displayed'] for s in rows.values())}")
    assert ok, res.failures


@pytest.mark.slow
def test_c11_linear_form_concentration():
    cfg = load_config(CONFIG, "concentration")
    res = run(cfg)
    trials = [r for r in res.records if r.kind == "trial"]
    (diag,) = res.diagnostics.values()
    ok = res.ok and len(trials) == 10_000
    report(11, "concentration of Z", ok,
           f"P(|Z|>10 sqrt(d)||Q||)={diag['exceed'][10]:.4f}, std={diag['std']:.4f}")
    assert ok, res.failures


@pytest.mark.slow
def test_c12_codegree():
    res = run_config("codegree")
    trials = [r for r in res.records if r.kind == "trial"]
    worst = max(max(r.stats["codegree_empty"], r.stats["codegree_interval"]) for r in trials)
    ok = res.ok and len(trials) == 50 and trials[0].stats["interval_len"] == 1
    report(12, "codegree below 0.9d", ok, f"50 trials, max codegree {worst} vs 0.9d = {0.9 * 64:.1f}")
    assert ok, res.failures


@pytest.mark.slow
def test_c13_ep_statistic():
    cfg = load_config(CONFIG, "ep")
    res = run(cfg)
    vals = [r.stats["statistic"] for r in res.records if r.kind == "trial"]
    ok = res.ok and len(vals) == 50 and all(np.isfinite(vals))
    report(13, "E_P statistic below frozen cap", ok,
           f"max {max(vals):.4f}, median {np.median(vals):.4f}, cap {cfg.param('cap')}")
    assert ok, res.failures


@pytest.mark.slow
def test_c14_corner_pipeline():
    res = run_config("corner")
    trials = [r for r in res.records if r.kind == "trial"]
    rate = float(np.mean([r.stats["member"] for r in trials]))
    worst = max(r.stats["s2_corner_ratio"] for r in trials)
    ok = res.ok and len(trials) == 50
    report(14, "corner pipeline", ok, f"membership rate {rate:.2f}, max s2(T)/sqrt(d/2)={worst:.3f}")
    assert ok, res.failures


def test_c15_freedman_empirical():
    res = run_config("freedman")
    tails = [r.stats for r in res.records if r.kind == "tail"]
    ok = res.ok and [s["t"] for s in tails] == [5, 10, 15, 20, 25]
    report(15, "Freedman/Bennett tail", ok,
           "; ".join(f"t={s['t']}: {s['empirical']:.4g} <= {s['bound']:.4g}" for s in tails))
    assert ok, res.failures
