"""Run every experiment in a config file, writing CSV and gnuplot scripts.

    python3 scripts/run_experiments.py [--config configs/acceptance.toml]
        [--out results] [--only spectral ep ...]

Exit status is the worst CLI status seen (2 if any assertion failed).
"""
import argparse
import sys
from pathlib import Path

from spectralgap.harness.cli import main as cli_main
from spectralgap.harness.config import EXPERIMENTS

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "acceptance.toml"))
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="+", choices=EXPERIMENTS)
    a = ap.parse_args()
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name in a.only or EXPERIMENTS:
        code = cli_main(["--config", a.config, "verify", name, "--timing",
                         "--output", str(out / f"{name}.csv"), "--plot-dir", str(out / "plots")])
        print(f"{name:15s} exit {code}", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
