"""Experiment configuration: dataclasses plus TOML loading."""
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = (
    "spectral", "concentration", "freedman", "codegree",
    "ep", "corner", "uniformity", "ratio-identity",
)
MODELS = ("digraph", "undirected")

DEFAULT_PARAMS = {
    "common": {"burn_in_factor": 20.0, "spacing_factor": 2.0, "tol": 1e-8, "restarts": 3},
    "spectral": {"max_ratio": None, "median_lo": None, "median_hi": None},
    "concentration": {
        "q": "rank-one", "gamma": 1.0, "t_multiples": [2, 4, 6, 8, 10],
        "max_exceed_at": 10, "max_exceed": None, "max_std": None,
        "chain_block": 500, "condition_L": None, "condition_c0": 0.05,
    },
    "freedman": {
        "steps": "rademacher", "m": 100, "t_grid": [5, 10, 15, 20, 25],
        "lambda_grid": [0.05, 0.1, 0.2, 0.3], "se_mult": 3.0, "chunk": 10_000,
    },
    "codegree": {"c0": 0.001, "threshold": 0.9},
    "ep": {"c0_values": [0.001, 0.05, 0.1], "stride": None, "cap": None, "cap_c0": 0.05},
    "corner": {"C_deg": 6.0, "min_member_rate": None, "max_ratio": None},
    "uniformity": {"burn_in": 1000, "spacing": 100, "p_min": 0.001},
    "ratio-identity": {"canonical_columns": True},
}


@dataclass(frozen=True)
class GridCell:
    n: int
    d: int
    model: str = "digraph"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 1 or self.d < 0:
            raise ValueError(f"bad grid cell n={self.n}, d={self.d}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: tuple = ()
    trials: int = 1
    base_seed: int = 0
    parameters: dict = field(default_factory=dict)
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "grid", tuple(
            c if isinstance(c, GridCell) else GridCell(**c) for c in self.grid
        ))

    def param(self, key):
        if key in self.parameters:
            return self.parameters[key]
        for section in (self.experiment, "common"):
            if key in DEFAULT_PARAMS.get(section, {}):
                return DEFAULT_PARAMS[section][key]
        raise KeyError(key)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        params = dict(self.parameters)
        params.update(kw.pop("parameters", {}) or {})
        return replace(self, parameters=params, **{k: v for k, v in kw.items() if v is not None})


def spectral_grid(ns, exponents=(0.4, 0.7), half=True, model="digraph"):
    """Cells d = ceil(n^a) for each exponent a, plus d = floor(n/2)."""
    cells = []
    for n in ns:
        ds = [math.ceil(n ** a) for a in exponents]
        if half:
            ds.append(n // 2)
        cells.extend(GridCell(n, d, model) for d in ds)
    return tuple(cells)


def load_config(path, experiment: Optional[str] = None) -> ExperimentConfig:
    """Read a TOML config.  A file may hold one experiment at top level or
    several under ``[experiments.<name>]``."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if "experiments" in raw:
        if experiment is None:
            raise ValueError("config holds several experiments; name one")
        body = dict(raw["experiments"].get(experiment) or {})
        body.setdefault("experiment", experiment)
    else:
        body = dict(raw)
        if experiment is not None:
            body.setdefault("experiment", experiment)
            if body["experiment"] != experiment:
                raise ValueError(f"config is for {body['experiment']!r}, not {experiment!r}")
    grid = list(body.pop("grid", []))
    rule = body.pop("grid_rule", None)
    if rule:
        grid.extend(spectral_grid(rule["ns"], rule.get("exponents", (0.4, 0.7)),
                                  rule.get("half", True), rule.get("model", "digraph")))
    known = {"experiment", "trials", "base_seed", "parameters", "output_path"}
    unknown = set(body) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(grid=tuple(grid), **body)
