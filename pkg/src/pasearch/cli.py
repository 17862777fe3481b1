"""Command-line front end.

Subcommands: generate, search, experiment, validate, compare, verify.
Exit codes: 0 on success, 2 when a requested check fails, 1 on errors
(bad parameters, unreadable files).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import params
from .analysis import (
    check_degree_concentration,
    check_edge_probability,
    check_interval_concentration,
    check_small_eta_mass,
    check_tail_bounds,
    contraction_statistic,
    max_degree_scaling,
)
from .errors import ConfigError, ConsistencyError, ParameterError, PrecisionError
from .generator import (
    generate_continuous,
    generate_sequential,
    generate_uniform_attachment,
    read_graph,
    validate_graph,
    write_edgelist,
    write_graph,
    write_realization,
)
from .harness import (
    ExperimentConfig,
    compare_generators,
    run_experiment,
    rung_band,
    verify_result,
)
from .oracle import LocalOracle, verify_locality, write_transcript
from .rng import STREAM_ANALYSIS, STREAM_SEARCH, derive_trial_seed, stream_rng
from .search import (
    DcaConfig,
    bbckl_search,
    dca_search,
    random_walk_search,
    trace_summary,
    write_trace_events,
)


def _parse_overrides(pairs) -> dict:
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise ParameterError(f"override must be key=value, got {p!r}")
        key, value = p.split("=", 1)
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ParameterError(f"override value must be numeric, got {p!r}") from None
    return out


def _parse_floats(text) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_ints(text) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated integers, got {text!r}") from None


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


# --------------------------------------------------------------- subcommands


def _make_graph(construction, n, m, seed):
    if construction == "sequential":
        return generate_sequential(n, m, seed), None
    if construction == "continuous":
        return generate_continuous(n, m, seed)
    return generate_uniform_attachment(n, m, seed), None


def cmd_generate(args) -> int:
    graph, realization = _make_graph(args.construction, args.n, args.m, args.seed)
    if args.check:
        try:
            validate_graph(graph)
        except ConsistencyError as exc:
            print(f"check failed: {exc}", file=sys.stderr)
            return 2
    if args.out:
        write_graph(graph, args.out)
    if args.edgelist:
        write_edgelist(graph, args.edgelist)
    if args.realization:
        if realization is None:
            raise ParameterError("--realization requires --construction continuous")
        write_realization(realization, args.realization)
    deg = graph.degrees
    _emit(
        {
            "n": graph.n,
            "m": graph.m,
            "seed": graph.seed,
            "construction": graph.construction,
            "edges": graph.n * graph.m,
            "degree_1": int(deg[0]),
            "max_degree": int(deg.max()),
        }
    )
    return 0


def cmd_search(args) -> int:
    if args.graph:
        graph = read_graph(args.graph)
    else:
        if args.n is None or args.m is None:
            raise ParameterError("need --graph or both --n and --m")
        graph, _ = _make_graph(args.construction, args.n, args.m, args.seed)
    oracle = LocalOracle(graph, handle_seed=args.seed)
    rng = stream_rng(args.seed, STREAM_SEARCH)
    wants_audit = bool(args.audit)
    wants_events = bool(args.trace)
    if args.algorithm in ("dca", "dca_no_phase1"):
        cfg = DcaConfig.default(
            graph.n,
            graph.m,
            budget_constant=args.budget_constant,
            **_parse_overrides(args.override),
        )
        trace = dca_search(
            oracle,
            cfg,
            rng,
            skip_phase1=args.algorithm == "dca_no_phase1",
            audit=wants_audit,
            record_events=wants_events,
        )
    else:
        lnn = math.log(graph.n) if graph.n > 1 else 1.0
        if args.algorithm == "bbckl":
            budget = max(1, math.ceil(args.budget_constant * lnn**4))
        else:
            budget = max(1, math.ceil(args.budget_constant * graph.n))
        runner = bbckl_search if args.algorithm == "bbckl" else random_walk_search
        trace = runner(oracle, budget, rng, audit=wants_audit, record_events=wants_events)
    if args.trace:
        write_trace_events(trace, args.trace, index_resolver=oracle.vertex_of)
    summary = trace_summary(trace)
    if args.audit:
        write_transcript(trace.transcript, args.audit)
        summary["locality"] = verify_locality(trace.transcript)
    _emit(summary)
    return 0 if trace.success else 2


def cmd_experiment(args) -> int:
    config = ExperimentConfig(
        n_ladder=_parse_ints(args.n_ladder),
        m=args.m,
        algorithm=args.algorithm,
        construction=args.construction,
        trials=args.trials,
        base_seed=args.base_seed,
        budget_constant=args.budget_constant,
        dca_overrides=_parse_overrides(args.override),
        rho_band=tuple(_parse_floats(args.rho_band)) if args.rho_band else None,
        fixed_graph=args.fixed_graph,
        workers=args.workers,
    )
    result = run_experiment(config, out_dir=args.out)
    for rung in result.rungs:
        _emit(
            {
                "n": rung.n,
                "success_rate": rung.success_rate,
                "mean_cost": rung.mean_cost,
                "mean_T": rung.mean_T,
                "mean_rho_in_band": rung.mean_rho_in_band,
            }
        )
    if args.out:
        print(f"wrote {args.out}/trials.csv and {args.out}/aggregates.json")
    return 0


def cmd_compare(args) -> int:
    comparison = compare_generators(
        args.n, args.m, args.trials, base_seed=args.base_seed, corrupt=args.corrupt
    )
    payload = comparison.to_dict()
    payload["consistent"] = comparison.consistent(args.alpha)
    _emit(payload)
    return 0 if payload["consistent"] else 2


def cmd_verify(args) -> int:
    outcome = verify_result(args.csv, args.json)
    _emit(outcome)
    return 0 if outcome["ok"] else 2


# ------------------------------------------------------------------ validate


def _check_degree(args) -> int:
    graph, realization = generate_continuous(args.n, args.m, args.seed)
    lo = max(10, math.ceil(params.default_omega(args.n)))
    hi = max(lo, int(params.n0(args.n, args.m)))
    idx = np.unique(np.geomspace(lo, hi, num=args.samples).astype(np.int64))
    report = check_degree_concentration(graph, realization, idx)
    if args.out:
        report.to_csv(args.out)
    ok = (
        report.median_rel_error <= args.median_tol
        and report.p90_rel_error <= args.p90_tol
    )
    _emit(
        {
            "check": "degree",
            "rows": len(report.rows),
            "excluded": report.excluded,
            "median_rel_error": report.median_rel_error,
            "p90_rel_error": report.p90_rel_error,
            "ok": ok,
        }
    )
    return 0 if ok else 2


def _check_intervals(args) -> int:
    _, realization = generate_continuous(args.n, args.m, args.seed)
    report = check_interval_concentration(realization)
    start = math.ceil(math.log(args.n) ** 3) if args.n > 1 else 1
    start = min(start, args.n)
    max_w = report.max_W_rel_error(min_index=start)
    med_len = report.median_w_rel_error(min_index=start)
    ok = report.identities_ok and max_w <= args.w_tol and med_len <= args.len_tol
    if args.out:
        report.to_csv(args.out)
    _emit(
        {
            "check": "intervals",
            "identities_ok": report.identities_ok,
            "from_index": start,
            "max_W_rel_error": max_w,
            "median_w_rel_error": med_len,
            "boundary_gap": report.boundary_gap,
            "ok": ok,
        }
    )
    return 0 if ok else 2


def _check_tails(args) -> int:
    rng = stream_rng(args.seed, STREAM_ANALYSIS)
    report = check_tail_bounds(
        _parse_ints(args.m_values),
        {
            "x": _parse_floats(args.x),
            "alpha": _parse_floats(args.alpha),
            "beta": _parse_floats(args.beta),
            "alpha_N": args.alpha_n,
            "beta_N": args.beta_n,
        },
        args.trials,
        rng,
        escalate=not args.no_escalate,
    )
    if args.out:
        report.to_csv(args.out)
    worst = max(
        (r.empirical / r.bound if r.bound > 0 else math.inf for r in report.rows),
        default=math.nan,
    )
    _emit(
        {
            "check": "tails",
            "rows": len(report.rows),
            "worst_empirical_over_bound": worst,
            "ok": report.all_satisfied,
        }
    )
    return 0 if report.all_satisfied else 2


def _check_edges(args) -> int:
    rng = stream_rng(args.seed, STREAM_ANALYSIS)
    report = check_edge_probability(
        args.n, args.m, args.i, args.j, args.trials, rng, buckets=args.buckets
    )
    if args.out:
        report.to_csv(args.out)
    ok = abs(report.ratio - 1.0) <= args.tol
    _emit(
        {
            "check": "edges",
            "empirical": report.empirical,
            "predicted": report.predicted,
            "ratio": report.ratio,
            "buckets": len(report.bucket_rows),
            "ok": ok,
        }
    )
    return 0 if ok else 2


def _check_smalleta(args) -> int:
    _, realization = generate_continuous(args.n, args.m, args.seed)
    if args.checkpoints:
        checkpoints = _parse_ints(args.checkpoints)
    else:
        floor = math.ceil(math.log(args.n) ** 3) if args.n > 1 else 1
        floor = min(floor, args.n)
        checkpoints = sorted(
            set(np.geomspace(floor, args.n, num=5).astype(np.int64).tolist())
        )
    report = check_small_eta_mass(realization, checkpoints)
    if args.out:
        report.to_csv(args.out)
    ok = report.max_ratio <= args.max_ratio
    _emit(
        {
            "check": "smalleta",
            "threshold": report.threshold,
            "small_blocks": report.small_blocks,
            "max_ratio": report.max_ratio,
            "ok": ok,
        }
    )
    return 0 if ok else 2


def _check_maxdeg(args) -> int:
    graphs = (
        generate_sequential(args.n, args.m, derive_trial_seed(args.base_seed, args.n, t))
        for t in range(args.graphs)
    )
    report = max_degree_scaling(graphs)
    if args.out:
        report.to_csv(args.out)
    in_top = sum(1 for row in report.rows if row[5] <= 10)
    frac = in_top / len(report.rows)
    ratios = report.ratios()
    ok = frac >= args.rank_frac
    _emit(
        {
            "check": "maxdeg",
            "graphs": len(report.rows),
            "vertex1_top10_fraction": frac,
            "min_ratio": min(ratios),
            "max_ratio": max(ratios),
            "ok": ok,
        }
    )
    return 0 if ok else 2


def _check_contraction(args) -> int:
    # the climb must start below the stop threshold to expose contraction,
    # so the start threshold drops to m unless overridden
    overrides = {"start_degree_threshold": float(args.m)}
    overrides.update(_parse_overrides(args.override))
    band = tuple(_parse_floats(args.band)) if args.band else rung_band(args.n)
    traces = []
    resolvers = []
    for t in range(args.trials):
        seed = derive_trial_seed(args.base_seed, args.n, t)
        graph = generate_sequential(args.n, args.m, seed)
        oracle = LocalOracle(graph, handle_seed=seed)
        cfg = DcaConfig.default(
            args.n, args.m, budget_constant=args.budget_constant, **overrides
        )
        traces.append(dca_search(oracle, cfg, stream_rng(seed, STREAM_SEARCH)))
        resolvers.append(oracle.vertex_of)
    report = contraction_statistic(traces, resolvers, band)
    if args.out:
        report.to_json(args.out)
    ok = report.mean <= args.max_rho
    _emit(
        {
            "check": "contraction",
            "mean": report.mean,
            "ci": [report.ci_low, report.ci_high],
            "count": report.count,
            "band": list(band),
            "ok": ok,
        }
    )
    return 0 if ok else 2


_VALIDATORS = {
    "degree": _check_degree,
    "intervals": _check_intervals,
    "tails": _check_tails,
    "edges": _check_edges,
    "smalleta": _check_smalleta,
    "maxdeg": _check_maxdeg,
    "contraction": _check_contraction,
}

# per-check (n, m, trials) used when the flag is not given
_VALIDATE_DEFAULTS = {
    "degree": (100000, 16, 0),
    "intervals": (100000, 8, 0),
    "tails": (0, 0, 10**6),
    "edges": (2000, 5, 40000),
    "smalleta": (100000, 4, 0),
    "maxdeg": (20000, 8, 0),
    "contraction": (100000, 32, 80),
}


def cmd_validate(args) -> int:
    dn, dm, dt = _VALIDATE_DEFAULTS[args.check]
    args.n = dn if args.n is None else args.n
    args.m = dm if args.m is None else args.m
    args.trials = dt if args.trials is None else args.trials
    return _VALIDATORS[args.check](args)


# --------------------------------------------------------------- arg parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pasearch",
        description="Preferential attachment generation and root search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample one graph and write it out")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--construction",
        choices=["sequential", "continuous", "uniform"],
        default="sequential",
    )
    p.add_argument("--out", help="binary graph file")
    p.add_argument("--edgelist", help="plain text edge list")
    p.add_argument("--realization", help="latent variables (continuous only)")
    p.add_argument("--check", action="store_true", help="run structural validation")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("search", help="run one search; exit 2 if the target is missed")
    p.add_argument("--graph", help="stored graph file (overrides --n/--m)")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--construction", choices=["sequential", "continuous"], default="sequential"
    )
    p.add_argument(
        "--algorithm",
        choices=["dca", "dca_no_phase1", "bbckl", "walk"],
        default="dca",
    )
    p.add_argument("--budget-constant", type=float, default=20.0)
    p.add_argument(
        "--override",
        action="append",
        metavar="KEY=VALUE",
        help="climbing-search parameter override (repeatable)",
    )
    p.add_argument("--trace", help="write per-step events as JSON lines")
    p.add_argument("--audit", help="write the query transcript as JSON lines")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("experiment", help="run a ladder of search trials")
    p.add_argument("--n-ladder", required=True, help="comma-separated sizes")
    p.add_argument("--m", type=int, required=True)
    p.add_argument(
        "--algorithm",
        choices=["dca", "dca_no_phase1", "bbckl", "walk"],
        default="dca",
    )
    p.add_argument(
        "--construction", choices=["sequential", "continuous"], default="sequential"
    )
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--budget-constant", type=float, default=20.0)
    p.add_argument("--override", action="append", metavar="KEY=VALUE")
    p.add_argument("--rho-band", help="LO,HI index band for contraction ratios")
    p.add_argument("--fixed-graph", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for trials.csv and aggregates.json")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="run one quantitative model check")
    p.add_argument(
        "--check", choices=sorted(_VALIDATORS), required=True, metavar="CHECK"
    )
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", help="write the underlying report table")
    # degree
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--median-tol", type=float, default=0.1)
    p.add_argument("--p90-tol", type=float, default=0.3)
    # intervals
    p.add_argument("--w-tol", type=float, default=0.05)
    p.add_argument("--len-tol", type=float, default=0.05)
    # tails
    p.add_argument("--m-values", default="2,5,10,20")
    p.add_argument("--x", default="0.25,0.5,0.75")
    p.add_argument("--alpha", default="0.25,0.5")
    p.add_argument("--beta", default="2,3")
    p.add_argument("--alpha-n", type=int, default=100)
    p.add_argument("--beta-n", type=int, default=10)
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    p.add_argument("--no-escalate", action="store_true")
    # edges
    p.add_argument("--i", type=int, default=50)
    p.add_argument("--j", type=int, default=500)
    p.add_argument("--buckets", type=int, default=8)
    p.add_argument("--tol", type=float, default=0.15)
    # smalleta
    p.add_argument("--checkpoints", help="comma-separated indices")
    p.add_argument("--max-ratio", type=float, default=1.0)
    # maxdeg
    p.add_argument("--graphs", type=int, default=30)
    p.add_argument("--rank-frac", type=float, default=0.8)
    # contraction
    p.add_argument("--band", help="LO,HI index band")
    p.add_argument("--max-rho", type=float, default=0.9)
    p.add_argument("--budget-constant", type=float, default=20.0)
    p.add_argument("--override", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="two-sample tests between constructions")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument(
        "--corrupt",
        action="store_true",
        help="compare against uniform attachment instead (expected to differ)",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="recheck a result pair's aggregates")
    p.add_argument("--csv", required=True)
    p.add_argument("--json", required=True)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ConfigError, PrecisionError, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
