"""Experiment orchestration.

Runs ladders of search trials over independently generated graphs,
aggregates per rung, and writes a two-file result: a trial-level CSV and
an aggregate JSON.  Reruns with the same config are byte-identical, and
verify_result recomputes the aggregates from the CSV to confirm a result
pair is internally consistent.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ._kernels import BACKEND
from .analysis import in_band_ratios
from .errors import ConsistencyError, ParameterError, PrecisionError
from .generator import (
    generate_continuous,
    generate_sequential,
    generate_uniform_attachment,
)
from .oracle import LocalOracle
from .rng import STREAM_SEARCH, derive_trial_seed, stream_rng
from .search import DcaConfig, bbckl_search, dca_search, random_walk_search

ALGORITHMS = ("dca", "dca_no_phase1", "bbckl", "walk")
CONSTRUCTIONS = ("sequential", "continuous")
CSV_COLUMNS = [
    "n",
    "m",
    "algorithm",
    "seed",
    "success",
    "total_cost",
    "phase1_steps",
    "T",
    "phase3_steps",
    "fallback_count",
]


@dataclass
class ExperimentConfig:
    """Declarative description of one ladder experiment."""

    n_ladder: list
    m: int
    algorithm: str = "dca"
    construction: str = "sequential"
    trials: int = 50
    base_seed: int = 0
    budget_constant: float = 20.0
    dca_overrides: dict = field(default_factory=dict)
    rho_band: tuple | None = None  # None: (1e3, n/ln n) per rung
    fixed_graph: bool = False
    workers: int = 1

    def validate(self):
        if not self.n_ladder or any(int(n) < 1 for n in self.n_ladder):
            raise ParameterError("n_ladder must be a nonempty list of positive sizes")
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"algorithm must be one of {ALGORITHMS}")
        if self.construction not in CONSTRUCTIONS:
            raise ParameterError(f"construction must be one of {CONSTRUCTIONS}")
        if self.m < 1:
            raise ParameterError("m must be at least 1")
        if self.algorithm in ("dca", "dca_no_phase1") and self.m < 2:
            raise ParameterError("climbing search needs m >= 2")
        if self.trials < 1:
            raise ParameterError("trials must be positive")
        if self.budget_constant <= 0:
            raise ParameterError("budget_constant must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be positive")
        if self.rho_band is not None and self.rho_band[0] > self.rho_band[1]:
            raise ParameterError(f"empty rho band {self.rho_band}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_ladder"] = [int(n) for n in self.n_ladder]
        d["rho_band"] = None if self.rho_band is None else list(self.rho_band)
        return d


def rung_band(n: int, rho_band=None) -> tuple:
    if rho_band is not None:
        return (float(rho_band[0]), float(rho_band[1]))
    return (1e3, n / math.log(n) if n > 1 else float(n))


def _resolve_budget(config: ExperimentConfig, n: int):
    """Per-rung search configuration; returns (DcaConfig or None, budget)."""
    if config.algorithm in ("dca", "dca_no_phase1"):
        cfg = DcaConfig.default(
            n, config.m, budget_constant=config.budget_constant, **config.dca_overrides
        )
        return cfg, cfg.budget
    lnn = math.log(n) if n > 1 else 1.0
    if config.algorithm == "bbckl":
        return None, max(1, math.ceil(config.budget_constant * lnn**4))
    return None, max(1, math.ceil(config.budget_constant * n))


@dataclass
class TrialRow:
    n: int
    m: int
    algorithm: str
    seed: int
    success: bool
    total_cost: int
    phase1_steps: int
    T: int
    phase3_steps: int
    fallback_count: int

    def as_csv(self):
        return [
            self.n,
            self.m,
            self.algorithm,
            self.seed,
            "true" if self.success else "false",
            self.total_cost,
            self.phase1_steps,
            self.T,
            self.phase3_steps,
            self.fallback_count,
        ]


@dataclass
class RungAggregate:
    n: int
    trials: int
    success_rate: float
    mean_cost: float
    median_cost: float
    mean_T: float
    rho_band: tuple
    in_band_ratios: list
    mean_rho_in_band: float | None
    resolved_config: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "mean_cost": self.mean_cost,
            "median_cost": self.median_cost,
            "mean_T": self.mean_T,
            "rho_band": list(self.rho_band),
            "in_band_ratios": self.in_band_ratios,
            "mean_rho_in_band": self.mean_rho_in_band,
            "resolved_config": self.resolved_config,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    rungs: list
    kernel_backend: str = BACKEND

    def to_payload(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "kernel_backend": self.kernel_backend,
            "rungs": [r.to_dict() for r in self.rungs],
        }

    def write(self, out_dir) -> tuple:
        """Write trials.csv and aggregates.json; returns their paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "trials.csv"
        json_path = out / "aggregates.json"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(row.as_csv())
        with open(json_path, "w") as fh:
            json.dump(self.to_payload(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        return csv_path, json_path


def _run_trial(config: ExperimentConfig, n: int, trial: int):
    """One independent trial; returns (TrialRow, in-band climb ratios)."""
    seed = derive_trial_seed(config.base_seed, n, trial)
    graph_seed = (
        derive_trial_seed(config.base_seed, n, 0) if config.fixed_graph else seed
    )
    try:
        if config.construction == "sequential":
            graph = generate_sequential(n, config.m, graph_seed)
        else:
            graph, _ = generate_continuous(n, config.m, graph_seed)
        oracle = LocalOracle(graph, handle_seed=graph_seed)
        rng = stream_rng(seed, STREAM_SEARCH)
        dca_cfg, budget = _resolve_budget(config, n)
        if config.algorithm in ("dca", "dca_no_phase1"):
            trace = dca_search(
                oracle,
                dca_cfg,
                rng,
                skip_phase1=config.algorithm == "dca_no_phase1",
            )
        elif config.algorithm == "bbckl":
            trace = bbckl_search(oracle, budget, rng)
        else:
            trace = random_walk_search(oracle, budget, rng)
        if config.algorithm in ("dca", "dca_no_phase1"):
            ratios = in_band_ratios(
                [trace], oracle.vertex_of, rung_band(n, config.rho_band)
            )
        else:
            ratios = []
    except Exception as exc:
        raise RuntimeError(
            f"trial failed: n={n} trial={trial} seed={seed}"
        ) from exc
    row = TrialRow(
        n=n,
        m=config.m,
        algorithm=trace.algorithm,
        seed=seed,
        success=trace.success,
        total_cost=trace.total_cost,
        phase1_steps=trace.phase1_steps,
        T=trace.T,
        phase3_steps=trace.phase3_steps,
        fallback_count=trace.fallback_steps,
    )
    return row, ratios


def _aggregate(config: ExperimentConfig, n: int, results) -> RungAggregate:
    rows = [r for r, _ in results]
    ratios = [x for _, rs in results for x in rs]
    costs = np.array([r.total_cost for r in rows], dtype=np.float64)
    dca_cfg, budget = _resolve_budget(config, n)
    resolved = asdict(dca_cfg) if dca_cfg is not None else {"budget": budget}
    return RungAggregate(
        n=n,
        trials=len(rows),
        success_rate=float(np.mean([r.success for r in rows])),
        mean_cost=float(costs.mean()),
        median_cost=float(np.median(costs)),
        mean_T=float(np.mean([r.T for r in rows])),
        rho_band=rung_band(n, config.rho_band),
        in_band_ratios=[float(x) for x in ratios],
        mean_rho_in_band=float(np.mean(ratios)) if ratios else None,
        resolved_config=resolved,
    )


def run_experiment(config: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run the full ladder; optionally write the result pair to out_dir."""
    config.validate()
    tasks = [(int(n), t) for n in config.n_ladder for t in range(config.trials)]
    if config.workers == 1:
        results = [_run_trial(config, n, t) for n, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda nt: _run_trial(config, *nt), tasks))
    rows = [r for r, _ in results]
    rungs = []
    for k, n in enumerate(int(n) for n in config.n_ladder):
        chunk = results[k * config.trials : (k + 1) * config.trials]
        rungs.append(_aggregate(config, n, chunk))
    result = ExperimentResult(config=config, rows=rows, rungs=rungs)
    if out_dir is not None:
        result.write(out_dir)
    return result


def _isclose(a, b):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def verify_result(csv_path, json_path) -> dict:
    """Recompute aggregates from the trial CSV and diff against the JSON.

    Returns {"ok": bool, "problems": [str, ...]}.  Mean in-band contraction
    is recomputed from the ratio lists embedded in the JSON, everything
    else from the CSV rows.
    """
    problems = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            problems.append(f"unexpected CSV header {header}")
            return {"ok": False, "problems": problems}
        rows = list(reader)
    with open(json_path) as fh:
        payload = json.load(fh)

    by_n: dict[int, list] = {}
    for raw in rows:
        if raw[4] not in ("true", "false"):
            problems.append(f"bad success value {raw[4]!r}")
            continue
        by_n.setdefault(int(raw[0]), []).append(raw)

    declared = {r["n"]: r for r in payload.get("rungs", [])}
    if set(declared) != set(by_n):
        problems.append(
            f"rung sizes differ: json {sorted(declared)} vs csv {sorted(by_n)}"
        )
    for n in sorted(set(declared) & set(by_n)):
        rung = declared[n]
        raws = by_n[n]
        succ = np.array([r[4] == "true" for r in raws])
        costs = np.array([int(r[5]) for r in raws], dtype=np.float64)
        ts = np.array([int(r[7]) for r in raws], dtype=np.float64)
        checks = [
            ("trials", len(raws), rung.get("trials")),
            ("success_rate", float(succ.mean()), rung.get("success_rate")),
            ("mean_cost", float(costs.mean()), rung.get("mean_cost")),
            ("median_cost", float(np.median(costs)), rung.get("median_cost")),
            ("mean_T", float(ts.mean()), rung.get("mean_T")),
        ]
        ratios = rung.get("in_band_ratios", [])
        checks.append(
            (
                "mean_rho_in_band",
                float(np.mean(ratios)) if ratios else None,
                rung.get("mean_rho_in_band"),
            )
        )
        for name, got, want in checks:
            if isinstance(got, int):
                ok = got == want
            else:
                ok = _isclose(got, want)
            if not ok:
                problems.append(f"n={n} {name}: csv gives {got}, json has {want}")
    return {"ok": not problems, "problems": problems}


def result_digest(csv_path, json_path) -> str:
    """SHA-256 over both result files, for rerun comparisons."""
    h = hashlib.sha256()
    for path in (csv_path, json_path):
        h.update(Path(path).read_bytes())
    return h.hexdigest()


# ------------------------------------------------------------------ fitting


_PREDICTORS = {
    "log_n": lambda n: math.log(n),
    "log72_n": lambda n: math.log(n) ** 3.5,
    "log4_n": lambda n: math.log(n) ** 4,
}


@dataclass
class FitResult:
    predictor: str
    column: str
    slope: float
    intercept: float
    r_squared: float
    points: list  # (n, x, y)


def fit_scaling(
    result: ExperimentResult, predictor: str = "log_n", column: str = "mean_T"
) -> FitResult:
    """Least-squares fit of a per-rung aggregate against a power of log n."""
    if predictor not in _PREDICTORS:
        raise ParameterError(f"predictor must be one of {sorted(_PREDICTORS)}")
    fn = _PREDICTORS[predictor]
    points = []
    for rung in result.rungs:
        y = getattr(rung, column, None)
        if y is None:
            raise ParameterError(f"rung aggregate has no column {column!r}")
        points.append((rung.n, fn(rung.n), float(y)))
    if len(points) < 3:
        raise PrecisionError(
            f"need at least 3 rungs to fit, got {len(points)}", required=3
        )
    x = np.array([p[1] for p in points])
    y = np.array([p[2] for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if math.isclose(ss_res, 0.0, abs_tol=1e-18) else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(
        predictor=predictor,
        column=column,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        points=points,
    )


# --------------------------------------------------------------- comparison


@dataclass
class GeneratorComparison:
    n: int
    m: int
    trials: int
    ks_statistic: float
    ks_pvalue: float
    chi2_statistic: float
    chi2_pvalue: float
    chi2_dof: int

    def consistent(self, alpha: float = 0.01) -> bool:
        return self.ks_pvalue > alpha and self.chi2_pvalue > alpha

    def to_dict(self) -> dict:
        return asdict(self)


def _degree1_sample(n, m, seeds, construction):
    out = np.empty(len(seeds), dtype=np.int64)
    for k, seed in enumerate(seeds):
        if construction == "sequential":
            g = generate_sequential(n, m, seed)
        elif construction == "continuous":
            g, _ = generate_continuous(n, m, seed)
        else:
            g = generate_uniform_attachment(n, m, seed)
        out[k] = m + int((g.left == 1).sum())
    return out


def compare_generators(
    n: int, m: int, trials: int, base_seed: int = 0, corrupt: bool = False
) -> GeneratorComparison:
    """Two-sample tests on vertex 1's degree across the two constructions.

    Draws `trials` independent graphs from each construction and compares
    the degree-of-vertex-1 samples with a two-sample KS test and a
    chi-squared test on histograms truncated at the pooled 99th
    percentile.  With corrupt=True the second sample comes from uniform
    attachment instead, which the tests are expected to reject.
    """
    if n > 1000:
        raise ParameterError(f"comparison is exact-regime only, need n <= 1000, got {n}")
    if n < 2 or m < 1:
        raise ParameterError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if trials < 2000:
        raise PrecisionError(
            f"need at least 2000 trials per sample, got {trials}", required=2000
        )
    seeds_a = [derive_trial_seed(base_seed, n, t) for t in range(trials)]
    seeds_b = [derive_trial_seed(base_seed, n, trials + t) for t in range(trials)]
    sample_a = _degree1_sample(n, m, seeds_a, "sequential")
    other = "uniform" if corrupt else "continuous"
    sample_b = _degree1_sample(n, m, seeds_b, other)

    ks = stats.ks_2samp(sample_a, sample_b, method="asymp")

    pooled = np.concatenate([sample_a, sample_b])
    cap = int(np.quantile(pooled, 0.99))
    cap = max(cap, int(pooled.min()))
    a_cl = np.minimum(sample_a, cap + 1)
    b_cl = np.minimum(sample_b, cap + 1)
    lo = int(pooled.min())
    bins = np.arange(lo, cap + 3)
    ha, _ = np.histogram(a_cl, bins=bins)
    hb, _ = np.histogram(b_cl, bins=bins)
    table = np.vstack([ha, hb])
    table = table[:, table.sum(axis=0) > 0]
    chi2 = stats.chi2_contingency(table)
    return GeneratorComparison(
        n=n,
        m=m,
        trials=trials,
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        chi2_statistic=float(chi2.statistic),
        chi2_pvalue=float(chi2.pvalue),
        chi2_dof=int(chi2.dof),
    )
