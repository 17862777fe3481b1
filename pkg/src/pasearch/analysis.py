"""Empirical validation of the model's quantitative behavior.

Checks cover: per-vertex degree concentration around eta_i sqrt(n/i),
interval boundary and length concentration, closed-form tail bounds on
block weights, pairwise edge probabilities, the cumulative mass of
small-eta blocks, the climb contraction statistic, and max-degree scaling.

Every report is a plain dataclass with CSV and JSON export, and is a pure
function of its inputs plus the random generator handed in.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import params
from .errors import ConsistencyError, ParameterError, PrecisionError
from .generator import ContinuousRealization, PAGraph, sample_exponential_sum
from .search import climb_ratios

IDENTITY_RTOL = 1e-9
_CHUNK = 1 << 24


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _check_pair(graph: PAGraph, realization: ContinuousRealization):
    if graph.construction != "continuous":
        raise ConsistencyError(
            f"need a continuous-construction graph, got {graph.construction!r}"
        )
    if (graph.n, graph.m, graph.seed) != (
        realization.n,
        realization.m,
        realization.seed,
    ):
        raise ConsistencyError(
            "graph and realization describe different runs: "
            f"({graph.n}, {graph.m}, {graph.seed}) vs "
            f"({realization.n}, {realization.m}, {realization.seed})"
        )


# ---------------------------------------------------------------- degrees


@dataclass
class ConcentrationReport:
    n: int
    m: int
    index_range: tuple
    rows: list  # (i, degree, eta, prediction, rel_error)
    median_rel_error: float
    p90_rel_error: float
    excluded: int

    def to_csv(self, path):
        _write_csv(path, ["i", "degree", "eta", "prediction", "rel_error"], self.rows)

    def to_json(self, path):
        _write_json(
            path,
            {
                "n": self.n,
                "m": self.m,
                "index_range": list(self.index_range),
                "median_rel_error": self.median_rel_error,
                "p90_rel_error": self.p90_rel_error,
                "rows": len(self.rows),
                "excluded": self.excluded,
            },
        )


def degree_relative_errors(degrees, eta, n, indices):
    """|degree / (eta sqrt(n/i)) - 1| per index; pure helper."""
    idx = np.asarray(indices, dtype=np.int64)
    pred = eta[idx - 1] * np.sqrt(n / idx)
    return pred, np.abs(degrees[idx - 1] / pred - 1.0)


def check_degree_concentration(
    graph: PAGraph, realization: ContinuousRealization, index_sample
) -> ConcentrationReport:
    """Compare realized degrees to eta_i sqrt(n/i) over sampled indices.

    Indices outside the concentrated regime (above the n0 cutoff, or with
    block weight below the small-eta threshold) are skipped and counted in
    `excluded`.
    """
    _check_pair(graph, realization)
    n, m = graph.n, graph.m
    idx = np.unique(np.asarray(sorted(index_sample), dtype=np.int64))
    if idx.size == 0 or idx[0] < 1 or idx[-1] > n:
        raise ParameterError("index sample must be nonempty within 1..n")
    cutoff = params.n0(n, m)
    lam = params.lambda0(n, m)
    keep = (idx <= cutoff) & (realization.eta[idx - 1] >= lam)
    excluded = int(idx.size - keep.sum())
    idx = idx[keep]
    if idx.size == 0:
        raise PrecisionError("every sampled index fell outside the concentrated regime")
    pred, rel = degree_relative_errors(graph.degrees, realization.eta, n, idx)
    rows = [
        (int(i), int(d), float(e), float(p), float(r))
        for i, d, e, p, r in zip(
            idx, graph.degrees[idx - 1], realization.eta[idx - 1], pred, rel
        )
    ]
    return ConcentrationReport(
        n=n,
        m=m,
        index_range=(int(idx[0]), int(idx[-1])),
        rows=rows,
        median_rel_error=float(np.median(rel)),
        p90_rel_error=float(np.percentile(rel, 90)),
        excluded=excluded,
    )


# --------------------------------------------------------------- intervals


@dataclass
class IntervalReport:
    n: int
    m: int
    start_index: int
    indices: np.ndarray = field(repr=False)
    W_rel_error: np.ndarray = field(repr=False)
    w_rel_error: np.ndarray = field(repr=False)
    sum_w_residual_rel: float = 0.0
    eta_residual_rel_max: float = 0.0
    identities_ok: bool = True
    boundary_gap: float = 0.0  # |W_n - 1|

    def max_W_rel_error(self, min_index=None):
        mask = slice(None) if min_index is None else self.indices >= min_index
        return float(self.W_rel_error[mask].max())

    def median_w_rel_error(self, min_index=None):
        mask = slice(None) if min_index is None else self.indices >= min_index
        return float(np.median(self.w_rel_error[mask]))

    def to_csv(self, path):
        rows = zip(self.indices.tolist(), self.W_rel_error.tolist(), self.w_rel_error.tolist())
        _write_csv(path, ["i", "W_rel_error", "w_rel_error"], rows)

    def to_json(self, path):
        _write_json(
            path,
            {
                "n": self.n,
                "m": self.m,
                "start_index": self.start_index,
                "max_W_rel_error": self.max_W_rel_error(),
                "median_w_rel_error": self.median_w_rel_error(),
                "sum_w_residual_rel": self.sum_w_residual_rel,
                "eta_residual_rel_max": self.eta_residual_rel_max,
                "identities_ok": self.identities_ok,
                "boundary_gap": self.boundary_gap,
            },
        )


def check_interval_concentration(realization: ContinuousRealization) -> IntervalReport:
    """Per-index errors of W_i ~ sqrt(i/n) and w_i ~ eta_i/(2m sqrt(in)).

    Also verifies the exact identities: interval lengths telescope to the
    last boundary, and block weights match independently recomputed block
    sums of the raw exponentials, both to IDENTITY_RTOL relative to the
    magnitudes being subtracted.
    """
    n, m = realization.n, realization.m
    start = max(1, math.ceil(params.default_omega(n)))
    j = np.arange(start, n + 1, dtype=np.int64)
    W_pred = np.sqrt(j / n)
    W_rel = np.abs(realization.W[j] / W_pred - 1.0)
    w_pred = realization.eta[j - 1] / (2.0 * m * np.sqrt(j.astype(np.float64) * n))
    w_rel = np.abs(realization.w[j - 1] / w_pred - 1.0)

    sum_w = float(realization.w.sum())
    W_n = float(realization.W[-1])
    sum_resid = abs(sum_w - W_n) / W_n
    # independent block sums: rowwise pairwise summation over the raw draws
    blocks = realization.xi[: n * m].reshape(n, m).sum(axis=1)
    scale = realization.upsilon[m : n * m + 1 : m]
    eta_resid = float(np.max(np.abs(realization.eta - blocks) / scale))
    ok = sum_resid <= IDENTITY_RTOL and eta_resid <= IDENTITY_RTOL
    return IntervalReport(
        n=n,
        m=m,
        start_index=start,
        indices=j,
        W_rel_error=W_rel,
        w_rel_error=w_rel,
        sum_w_residual_rel=sum_resid,
        eta_residual_rel_max=eta_resid,
        identities_ok=ok,
        boundary_gap=abs(W_n - 1.0),
    )


# -------------------------------------------------------------- tail bounds


def bound_eta_lower(m: int, x: float) -> float:
    """Closed-form bound on P(eta <= m x) for 0 < x <= 1."""
    if not 0 < x <= 1:
        raise ParameterError(f"need 0 < x <= 1, got {x}")
    return (x * math.exp(1.0 - x)) ** m

def bound_sum_deviation(N: int, alpha: float) -> float:
    """Closed-form bound on P(|Z - N| >= alpha N), Z a sum of N exponentials."""
    if not 0 < alpha < 1:
        raise ParameterError(f"need 0 < alpha < 1, got {alpha}")
    return 2.0 * math.exp(-(alpha**2) * N / 3.0)

def bound_sum_upper(N: int, beta: float) -> float:
    """Chernoff bound on P(Z >= beta N) for beta > 1: (beta e^{1-beta})^N."""
    if beta <= 1:
        raise ParameterError(f"need beta > 1, got {beta}")
    return (beta * math.exp(1.0 - beta)) ** N


def required_trials(bound: float) -> int:
    """Trials needed so that three binomial sigmas at the bound stay under
    a tenth of the bound."""
    if not 0 < bound <= 1:
        raise ParameterError(f"bound must be in (0, 1], got {bound}")
    return max(1, math.ceil(900.0 * (1.0 - bound) / bound))


@dataclass
class TailBoundRow:
    kind: str  # eta_lower | sum_deviation | sum_upper
    m: int  # block length (or sum length N)
    parameter: float  # x, alpha, or beta
    empirical: float
    bound: float
    trials: int
    satisfied: bool


@dataclass
class TailBoundReport:
    rows: list
    requested_trials: int

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)

    def to_csv(self, path):
        _write_csv(
            path,
            ["kind", "m", "parameter", "empirical", "bound", "trials", "satisfied"],
            [
                (r.kind, r.m, r.parameter, r.empirical, r.bound, r.trials, r.satisfied)
                for r in self.rows
            ],
        )

    def to_json(self, path):
        _write_json(
            path,
            {
                "requested_trials": self.requested_trials,
                "all_satisfied": self.all_satisfied,
                "rows": [
                    {
                        "kind": r.kind,
                        "m": r.m,
                        "parameter": r.parameter,
                        "empirical": r.empirical,
                        "bound": r.bound,
                        "trials": r.trials,
                        "satisfied": r.satisfied,
                    }
                    for r in self.rows
                ],
            },
        )


def _estimate_tail(rng, shape, trials, event):
    """Monte Carlo P(event(draws)) over `trials` Erlang(shape) draws."""
    hits = 0
    left = trials
    while left > 0:
        size = min(left, _CHUNK)
        draws = sample_exponential_sum(shape, rng, size=size)
        hits += int(event(draws).sum())
        left -= size
    return hits / trials


def check_tail_bounds(
    m_values, parameters, trials: int, rng, escalate: bool = True
) -> TailBoundReport:
    """Monte Carlo comparison of block-weight tails to closed-form bounds.

    Args:
      m_values: block lengths for the lower-tail rows.
      parameters: mapping with any of keys "x" (lower-tail points),
        "alpha" (deviation fractions), "beta" (upper multiples), and
        optionally "alpha_N" / "beta_N" (sum lengths, defaults 100 / 10).
      trials: baseline Monte Carlo size per row.
      rng: random source.
      escalate: when a row's bound needs more than `trials` samples to
        satisfy the three-sigma precision rule, draw that many instead;
        with escalate=False such a row raises PrecisionError carrying the
        required count.

    Each row is satisfied when its estimate is at or below the bound plus
    three binomial sigmas at the bound.
    """
    if trials < 1:
        raise ParameterError("trials must be positive")
    plan = []
    for m in m_values:
        for x in parameters.get("x", ()):
            plan.append(("eta_lower", int(m), float(x), bound_eta_lower(m, x)))
    alpha_n = int(parameters.get("alpha_N", 100))
    for alpha in parameters.get("alpha", ()):
        plan.append(
            ("sum_deviation", alpha_n, float(alpha), bound_sum_deviation(alpha_n, alpha))
        )
    beta_n = int(parameters.get("beta_N", 10))
    for beta in parameters.get("beta", ()):
        plan.append(("sum_upper", beta_n, float(beta), bound_sum_upper(beta_n, beta)))
    if not plan:
        raise ParameterError("no tail-bound rows requested")

    rows = []
    for kind, m, value, bound in plan:
        need = required_trials(bound)
        if need > trials and not escalate:
            raise PrecisionError(
                f"row ({kind}, m={m}, {value}) needs {need} trials to resolve "
                f"its bound {bound:.3g}, got {trials}",
                required=need,
            )
        row_trials = max(trials, need)
        if kind == "eta_lower":
            emp = _estimate_tail(rng, m, row_trials, lambda z, t=m * value: z <= t)
        elif kind == "sum_deviation":
            emp = _estimate_tail(
                rng, m, row_trials, lambda z, t=m * value, c=m: np.abs(z - c) >= t
            )
        else:
            emp = _estimate_tail(rng, m, row_trials, lambda z, t=m * value: z >= t)
        sigma = math.sqrt(bound * (1.0 - bound) / row_trials)
        rows.append(
            TailBoundRow(
                kind=kind,
                m=m,
                parameter=value,
                empirical=emp,
                bound=bound,
                trials=row_trials,
                satisfied=emp <= bound + 3.0 * sigma,
            )
        )
    return TailBoundReport(rows=rows, requested_trials=trials)


# -------------------------------------------------------- edge probability


@dataclass
class EdgeProbabilityReport:
    n: int
    m: int
    i: int
    j: int
    trials: int
    empirical: float
    predicted: float  # mean of eta_i/(2 sqrt(ij)) over trials
    ratio: float
    bucket_rows: list  # (eta_lo, eta_hi, count, empirical, predicted, ratio)

    def to_csv(self, path):
        _write_csv(
            path,
            ["eta_lo", "eta_hi", "count", "empirical", "predicted", "ratio"],
            self.bucket_rows,
        )

    def to_json(self, path):
        _write_json(
            path,
            {
                "n": self.n,
                "m": self.m,
                "i": self.i,
                "j": self.j,
                "trials": self.trials,
                "empirical": self.empirical,
                "predicted": self.predicted,
                "ratio": self.ratio,
                "buckets": len(self.bucket_rows),
            },
        )


def check_edge_probability(
    n: int, m: int, i: int, j: int, trials: int, rng, buckets: int = 8
) -> EdgeProbabilityReport:
    """Estimate P(edge {i, j}) over fresh realizations vs eta_i/(2 sqrt(ij)).

    Simulates only the latent variables (no graph assembly): for each
    trial, draws the mn+1 exponentials, reads off vertex i's interval and
    the positions of vertex j's m edge points, and counts a hit when any
    point lands in the interval.  Rows are bucketed by eta_i so the
    comparison conditions on the block weight as the prediction does.
    """
    omega = params.default_omega(n)
    if not (omega <= i < j <= n):
        raise ParameterError(f"need omega <= i < j <= n, got i={i}, j={j}, n={n}")
    if trials < 10**4:
        raise ParameterError(f"need at least 10^4 trials, got {trials}")
    typical = m / (2.0 * math.sqrt(float(i) * j))
    need = math.ceil(100.0 / typical)
    if trials < need:
        raise PrecisionError(
            f"edge probability ~{typical:.2g} needs ~{need} trials, got {trials}",
            required=need,
        )

    mn = n * m
    rows_per_chunk = max(1, _CHUNK // (mn + 1))
    hits = np.empty(trials, dtype=bool)
    etas = np.empty(trials, dtype=np.float64)
    done = 0
    cols = np.arange((j - 1) * m, j * m)  # 0-based: edge k has prefix index k
    while done < trials:
        size = min(rows_per_chunk, trials - done)
        xi = rng.standard_exponential((size, mn + 1))
        c = np.cumsum(xi, axis=1)  # c[:, N-1] = sum of first N draws
        total = c[:, mn]
        lo_sum = c[:, m * (i - 1) - 1] if i > 1 else np.zeros(size)
        w_lo = np.sqrt(lo_sum / total)
        w_hi = np.sqrt(c[:, m * i - 1] / total)
        r_cols = np.sqrt(c[:, cols] / total[:, None])
        ell = (1.0 - rng.random((size, m))) * r_cols
        inside = (ell > w_lo[:, None]) & (ell <= w_hi[:, None])
        hits[done : done + size] = inside.any(axis=1)
        etas[done : done + size] = c[:, m * i - 1] - lo_sum
        done += size

    predicted_each = etas / (2.0 * math.sqrt(float(i) * j))
    empirical = float(hits.mean())
    predicted = float(predicted_each.mean())
    ratio = empirical / predicted

    edges = np.quantile(etas, np.linspace(0.0, 1.0, buckets + 1))
    bucket_rows = []
    for b in range(buckets):
        lo, hi = edges[b], edges[b + 1]
        mask = (etas >= lo) & (etas <= hi if b == buckets - 1 else etas < hi)
        count = int(mask.sum())
        if count == 0:
            continue
        be = float(hits[mask].mean())
        bp = float(predicted_each[mask].mean())
        bucket_rows.append(
            (float(lo), float(hi), count, be, bp, be / bp if bp > 0 else math.nan)
        )
    return EdgeProbabilityReport(
        n=n,
        m=m,
        i=i,
        j=j,
        trials=trials,
        empirical=empirical,
        predicted=predicted,
        ratio=ratio,
        bucket_rows=bucket_rows,
    )


# ----------------------------------------------------------- small-eta mass


@dataclass
class SmallEtaReport:
    n: int
    m: int
    threshold: float
    checkpoints: list
    mass: list  # B_i per checkpoint
    ratios: list  # B_i log n / W_i
    max_ratio: float
    small_blocks: int

    def to_csv(self, path):
        _write_csv(
            path,
            ["checkpoint", "mass", "ratio"],
            zip(self.checkpoints, self.mass, self.ratios),
        )

    def to_json(self, path):
        _write_json(
            path,
            {
                "n": self.n,
                "m": self.m,
                "threshold": self.threshold,
                "max_ratio": self.max_ratio,
                "small_blocks": self.small_blocks,
                "checkpoints": list(self.checkpoints),
            },
        )


def small_eta_mass(eta, W, n, m, checkpoints):
    """Cumulative small-block mass B_i and ratios B_i log n / W_i; pure core."""
    lam = params.lambda0(n, m)
    v0 = max(1, math.ceil(params.default_omega(n)))
    v = np.arange(v0, n + 1, dtype=np.int64)
    terms = np.where(
        eta[v - 1] <= lam, lam / (2.0 * m * np.sqrt(v.astype(np.float64) * n)), 0.0
    )
    csum = np.concatenate(([0.0], np.cumsum(terms)))
    cp = np.asarray(list(checkpoints), dtype=np.int64)
    upto = np.clip(cp - v0 + 1, 0, v.size)
    mass = csum[upto]
    lnn = math.log(n) if n > 1 else 1.0
    ratios = mass * lnn / W[cp]
    return lam, mass, ratios, int((eta <= lam).sum())


def check_small_eta_mass(
    realization: ContinuousRealization, checkpoints
) -> SmallEtaReport:
    """Weight of blocks below the small-eta threshold, at index checkpoints."""
    n, m = realization.n, realization.m
    cp = sorted(int(c) for c in checkpoints)
    floor = math.ceil(math.log(n) ** 3) if n > 1 else 1
    if not cp or cp[0] < floor or cp[-1] > n:
        raise ParameterError(f"checkpoints must lie within [{floor}, {n}]")
    lam, mass, ratios, small = small_eta_mass(
        realization.eta, realization.W, n, m, cp
    )
    return SmallEtaReport(
        n=n,
        m=m,
        threshold=lam,
        checkpoints=cp,
        mass=[float(b) for b in mass],
        ratios=[float(r) for r in ratios],
        max_ratio=float(np.max(ratios)),
        small_blocks=small,
    )


# ------------------------------------------------------------- contraction


@dataclass
class ContractionReport:
    mean: float
    ci_low: float
    ci_high: float
    count: int
    band: tuple

    def to_json(self, path):
        _write_json(
            path,
            {
                "mean": self.mean,
                "ci_low": self.ci_low,
                "ci_high": self.ci_high,
                "count": self.count,
                "band": list(self.band),
            },
        )


def in_band_ratios(traces, index_resolver, band) -> list[float]:
    """Climb ratios v_t/v_{t-1} restricted to steps with v_{t-1} in band."""
    lo, hi = band
    out = []
    for trace in traces:
        seq = trace.climb_sequence
        if len(seq) < 2:
            continue
        idx = [index_resolver(h) for h in seq]
        ratios = climb_ratios(trace, index_resolver)
        for t, rho in enumerate(ratios):
            if lo <= idx[t] <= hi:
                out.append(rho)
    return out


def contraction_statistic(
    traces, index_resolver, band, rng=None, bootstrap: int = 2000, min_steps: int = 30
) -> ContractionReport:
    """Mean climb contraction over in-band steps, with a bootstrap CI.

    Args:
      traces: climbing-search traces (others contribute nothing).
      index_resolver: callable handle -> true index for each trace's oracle;
        pass a per-trace resolver list via zip beforehand if oracles differ.
      band: (lo, hi) index range filtering on the step's source vertex.
      rng: bootstrap resampling source; a fixed default keeps reports
        deterministic.
      bootstrap: resample count for the percentile CI.
      min_steps: minimum pooled steps; fewer raises PrecisionError.
    """
    if band[0] > band[1]:
        raise ParameterError(f"empty band {band}")
    if callable(index_resolver):
        pairs = [(t, index_resolver) for t in traces]
    else:
        pairs = list(zip(traces, index_resolver))
    ratios = []
    for trace, resolver in pairs:
        ratios.extend(in_band_ratios([trace], resolver, band))
    if len(ratios) < min_steps:
        raise PrecisionError(
            f"only {len(ratios)} in-band climb steps, need {min_steps}",
            required=min_steps,
        )
    arr = np.asarray(ratios, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(0)
    means = rng.choice(arr, size=(bootstrap, arr.size), replace=True).mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    return ContractionReport(
        mean=float(arr.mean()),
        ci_low=float(lo),
        ci_high=float(hi),
        count=int(arr.size),
        band=(float(band[0]), float(band[1])),
    )


# ------------------------------------------------------- max degree scaling


@dataclass
class MaxDegreeReport:
    rows: list  # (n, m, seed, max_degree, ratio, vertex1_rank)

    def ratios(self):
        return [r[4] for r in self.rows]

    def to_csv(self, path):
        _write_csv(
            path, ["n", "m", "seed", "max_degree", "ratio", "vertex1_rank"], self.rows
        )

    def to_json(self, path):
        _write_json(
            path,
            {
                "rows": [
                    {
                        "n": r[0],
                        "m": r[1],
                        "seed": r[2],
                        "max_degree": r[3],
                        "ratio": r[4],
                        "vertex1_rank": r[5],
                    }
                    for r in self.rows
                ]
            },
        )


def max_degree_scaling(graphs) -> MaxDegreeReport:
    """Max degree over sqrt(n) per graph, plus vertex 1's degree rank."""
    rows = []
    for g in graphs:
        deg = g.degrees
        md = int(deg.max())
        rank = int((deg > deg[0]).sum()) + 1
        rows.append((g.n, g.m, g.seed, md, md / math.sqrt(g.n), rank))
    return MaxDegreeReport(rows=rows)
