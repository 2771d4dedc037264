"""Record schemas, CSV/JSON emission and gnuplot scripts.

Each experiment has a fixed column list (``COLUMNS``).  Trial rows carry
``seed``; summary rows are tagged ``kind=summary``.  ``wall_time`` is only
written when timing is requested, so default output is byte-reproducible.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field

COMMON = ["experiment", "kind", "model", "n", "d", "trial", "seed"]

COLUMNS = {
    "spectral": COMMON + ["s1", "s2", "s2_sqrt_d", "s2_vu", "converged", "iterations",
                          "q10", "median", "q90", "max", "skip_reason"],
    "concentration": COMMON + ["chain_pos", "Z", "z_norm", "hs", "ep_pass", "t_mult",
                               "exceed_freq", "theoremD_bound", "std", "shift_delta",
                               "shift_sum", "filter_rate", "skip_reason"],
    "freedman": COMMON + ["m", "t", "lam", "empirical", "mc_se", "bound", "bernstein", "ok"],
    "codegree": COMMON + ["interval_start", "interval_len", "codegree_empty",
                          "codegree_interval", "threshold", "ok", "skip_reason"],
    "ep": COMMON + ["c0", "stride", "statistic", "finite", "ok", "skip_reason"],
    "corner": COMMON + ["member", "s2_corner", "s2_corner_ratio", "lambda_extreme",
                        "lambda_ratio", "member_rate", "skip_reason"],
    "uniformity": COMMON + ["cells", "samples", "chi2", "p_value", "ok"],
    "ratio-identity": COMMON + ["configs", "rows", "violations", "violations_as_displayed"],
}


@dataclass
class TrialRecord:
    experiment: str
    n: int
    d: int
    trial: int
    seed: int
    stats: dict = field(default_factory=dict)
    model: str = ""
    kind: str = "trial"
    wall_time: float = float("nan")

    def row(self) -> dict:
        out = {"experiment": self.experiment, "kind": self.kind, "model": self.model,
               "n": self.n, "d": self.d, "trial": self.trial, "seed": self.seed}
        out.update(self.stats)
        out["wall_time"] = self.wall_time
        return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def columns_for(experiment: str, timing: bool = False) -> list:
    cols = list(COLUMNS[experiment])
    return cols + ["wall_time"] if timing else cols


def to_csv(records, experiment: str, timing: bool = False) -> str:
    cols = columns_for(experiment, timing)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        row = r.row()
        extra = set(row) - set(cols) - {"wall_time"}
        if extra:
            raise KeyError(f"record has columns outside the {experiment} schema: {sorted(extra)}")
        w.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def to_json(records, experiment: str, timing: bool = False) -> str:
    cols = columns_for(experiment, timing)
    rows = []
    for r in records:
        row = r.row()
        rows.append({c: _json_safe(row.get(c)) for c in cols if c in row})
    return json.dumps({"experiment": experiment, "columns": cols, "records": rows}, indent=1)


GNUPLOT_SPECTRAL = """\
# usage: gnuplot {script}
set datafile separator ","
set terminal svg size 800,500
set output "{stem}.svg"
set xlabel "trial"
set ylabel "s2 / sqrt(d(1-d/n))"
set key outside
plot for [cell in "{cells}"] "{csv}" using (strcol(2) eq "trial" && strcol(4)."/".strcol(5) eq cell ? $6 : 1/0):11 with points title cell
"""

GNUPLOT_GENERIC = """\
# usage: gnuplot {script}
set datafile separator ","
set terminal svg size 800,500
set output "{stem}.svg"
set xlabel "{x}"
set ylabel "{y}"
plot "{csv}" using "{x}":"{y}" with linespoints title "{y}"
"""

PLOT_AXES = {
    "concentration": ("t_mult", "exceed_freq"),
    "freedman": ("t", "empirical"),
    "codegree": ("trial", "codegree_empty"),
    "ep": ("trial", "statistic"),
    "corner": ("trial", "s2_corner_ratio"),
    "uniformity": ("samples", "p_value"),
    "ratio-identity": ("n", "violations"),
}


def gnuplot_script(experiment: str, csv_name: str, records=()) -> str:
    stem = csv_name.rsplit(".", 1)[0]
    script = stem + ".gp"
    if experiment == "spectral":
        cells = sorted({f"{r.n}/{r.d}" for r in records if r.kind == "trial"})
        return GNUPLOT_SPECTRAL.format(script=script, stem=stem, csv=csv_name, cells=" ".join(cells))
    x, y = PLOT_AXES[experiment]
    return GNUPLOT_GENERIC.format(script=script, stem=stem, csv=csv_name, x=x, y=y)
