"""Pilot runs that fix the empirical caps used by the acceptance suite.

Pilots use their own base seeds (disjoint from the acceptance seeds) and
print a TOML fragment; paste it into configs/acceptance.toml to freeze.

    python3 scripts/calibrate.py [--trials 50] [--margin 1.25]
"""
import argparse
import math
import time

import numpy as np

from spectralgap.harness import ExperimentConfig, GridCell, run

PILOT_SEED = 0xCA11B


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--conc-trials", type=int, default=2000)
    ap.add_argument("--margin", type=float, default=1.25)
    a = ap.parse_args()

    t0 = time.time()
    ep = run(ExperimentConfig("ep", (GridCell(512, 64),), a.trials, PILOT_SEED,
                              {"c0_values": [0.05], "stride": 1}))
    vals = np.array([r.stats["statistic"] for r in ep.records if r.kind == "trial"])
    cap = math.ceil(a.margin * vals.max() * 100) / 100
    print(f"# ep pilot: {vals.size} trials, min {vals.min():.4f} median {np.median(vals):.4f} "
          f"max {vals.max():.4f} ({time.time() - t0:.0f}s)")

    t0 = time.time()
    conc = run(ExperimentConfig("concentration", (GridCell(512, 64),), a.conc_trials,
                                PILOT_SEED, {"q": "rank-one"}))
    diag = conc.diagnostics[(512, 64)]
    print(f"# concentration pilot: {a.conc_trials} samples, std {diag['std']:.4f}, "
          f"exceedance {diag['exceed']} ({time.time() - t0:.0f}s)")

    t0 = time.time()
    corner = run(ExperimentConfig("corner", (GridCell(1024, 64, "undirected"),), 10, PILOT_SEED))
    ratios = [r.stats["s2_corner_ratio"] for r in corner.records if r.kind == "trial"]
    print(f"# corner pilot: member rate {corner.diagnostics[(1024, 64)]['member_rate']:.2f}, "
          f"max s2(T)/sqrt(d/2) {max(ratios):.3f} ({time.time() - t0:.0f}s)")

    print("[experiments.ep.parameters]")
    print(f"cap = {cap}")
    print(f"# pilot max {vals.max():.6f} x margin {a.margin}, rounded up")


if __name__ == "__main__":
    main()
