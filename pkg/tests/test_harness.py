from __future__ import annotations

import csv
import json
import math

import pytest

from pasearch import (
    DcaConfig,
    ExperimentConfig,
    ExperimentResult,
    LocalOracle,
    ParameterError,
    PrecisionError,
    RungAggregate,
    compare_generators,
    dca_search,
    derive_trial_seed,
    fit_scaling,
    generate_sequential,
    result_digest,
    run_experiment,
    rung_band,
    verify_result,
)
from pasearch.harness import CSV_COLUMNS
from pasearch.rng import STREAM_SEARCH, stream_rng


def _config(**kw):
    base = dict(
        n_ladder=[300, 600],
        m=3,
        algorithm="dca",
        trials=4,
        base_seed=5,
        dca_overrides={"start_degree_threshold": 3.0},
    )
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def small_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp")
    config = _config()
    result = run_experiment(config, out_dir=out)
    return config, result, out / "trials.csv", out / "aggregates.json"


def test_config_validation():
    _config().validate()
    bad = [
        dict(n_ladder=[]),
        dict(n_ladder=[0]),
        dict(algorithm="dijkstra"),
        dict(construction="adjacency"),
        dict(m=0),
        dict(m=1),  # climbing search needs m >= 2
        dict(trials=0),
        dict(budget_constant=0.0),
        dict(workers=0),
        dict(rho_band=(5.0, 2.0)),
    ]
    for kw in bad:
        with pytest.raises(ParameterError):
            _config(**kw).validate()
    _config(m=1, algorithm="walk").validate()


def test_rung_band_defaults():
    lo, hi = rung_band(10**6)
    assert lo == 1e3
    assert hi == pytest.approx(10**6 / math.log(10**6))
    assert rung_band(500, (2, 5)) == (2.0, 5.0)


def test_result_files_and_aggregates(small_result):
    config, result, csv_path, json_path = small_result
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + len(config.n_ladder) * config.trials
    payload = json.loads(json_path.read_text())
    assert payload["config"] == config.to_dict()
    assert payload["kernel_backend"] in ("ext", "python")
    assert [r["n"] for r in payload["rungs"]] == [300, 600]
    for rung in payload["rungs"]:
        assert rung["trials"] == config.trials
        assert rung["resolved_config"]["start_degree_threshold"] == 3.0
        assert rung["resolved_config"]["budget"] > 0
    # trial seeds recorded in the CSV are the derived per-trial seeds
    seeds = [int(r[3]) for r in rows[1:]]
    expect = [
        derive_trial_seed(config.base_seed, n, t)
        for n in config.n_ladder
        for t in range(config.trials)
    ]
    assert seeds == expect


def test_rerun_is_byte_identical(small_result, tmp_path):
    config, _, csv_path, json_path = small_result
    rerun = _config()
    run_experiment(rerun, out_dir=tmp_path)
    assert result_digest(csv_path, json_path) == result_digest(
        tmp_path / "trials.csv", tmp_path / "aggregates.json"
    )


def test_parallel_workers_match_serial(tmp_path):
    serial = run_experiment(
        _config(algorithm="bbckl", n_ladder=[200, 400], trials=3),
        out_dir=tmp_path / "serial",
    )
    parallel = run_experiment(
        _config(algorithm="bbckl", n_ladder=[200, 400], trials=3, workers=2),
        out_dir=tmp_path / "parallel",
    )
    assert serial.rows[0].seed == parallel.rows[0].seed
    # the stored config differs in `workers`, the measurements must not
    assert (tmp_path / "serial" / "trials.csv").read_bytes() == (
        tmp_path / "parallel" / "trials.csv"
    ).read_bytes()
    read_rungs = lambda d: json.loads((d / "aggregates.json").read_text())["rungs"]
    assert read_rungs(tmp_path / "serial") == read_rungs(tmp_path / "parallel")


def test_verify_result_accepts_honest_files(small_result):
    _, _, csv_path, json_path = small_result
    report = verify_result(csv_path, json_path)
    assert report == {"ok": True, "problems": []}


def test_verify_result_detects_tampering(small_result, tmp_path):
    _, _, csv_path, json_path = small_result
    lines = csv_path.read_text().splitlines()
    parts = lines[1].split(",")
    parts[5] = str(int(parts[5]) + 1)  # bump one trial's cost
    tampered = tmp_path / "trials.csv"
    tampered.write_text("\n".join([lines[0], ",".join(parts)] + lines[2:]) + "\n")
    report = verify_result(tampered, json_path)
    assert not report["ok"]
    assert any("mean_cost" in p for p in report["problems"])

    headerless = tmp_path / "bad_header.csv"
    headerless.write_text("\n".join(["a,b,c"] + lines[1:]) + "\n")
    report = verify_result(headerless, json_path)
    assert not report["ok"]


def test_trial_wiring_matches_manual_run(small_result):
    """Row 0 of the experiment equals a by-hand trial with the same seeds."""
    config, result, _, _ = small_result
    n = config.n_ladder[0]
    seed = derive_trial_seed(config.base_seed, n, 0)
    graph = generate_sequential(n, config.m, seed)
    oracle = LocalOracle(graph, handle_seed=seed)
    cfg = DcaConfig.default(
        n, config.m, budget_constant=config.budget_constant, **config.dca_overrides
    )
    trace = dca_search(oracle, cfg, stream_rng(seed, STREAM_SEARCH))
    row = result.rows[0]
    assert (row.success, row.total_cost, row.T, row.phase1_steps) == (
        trace.success,
        trace.total_cost,
        trace.T,
        trace.phase1_steps,
    )


def test_fixed_graph_reuses_first_graph(tmp_path):
    config = _config(n_ladder=[400], m=4, trials=2, fixed_graph=True,
                     dca_overrides={"start_degree_threshold": 4.0})
    result = run_experiment(config)
    n = 400
    graph_seed = derive_trial_seed(config.base_seed, n, 0)
    trial1_seed = derive_trial_seed(config.base_seed, n, 1)
    graph = generate_sequential(n, config.m, graph_seed)
    oracle = LocalOracle(graph, handle_seed=graph_seed)
    cfg = DcaConfig.default(n, config.m, **config.dca_overrides)
    trace = dca_search(oracle, cfg, stream_rng(trial1_seed, STREAM_SEARCH))
    row = result.rows[1]
    assert row.seed == trial1_seed
    assert (row.success, row.total_cost, row.T) == (
        trace.success,
        trace.total_cost,
        trace.T,
    )


def test_walk_on_single_vertex_graph():
    result = run_experiment(
        ExperimentConfig(n_ladder=[1], m=2, algorithm="walk", trials=2, base_seed=3)
    )
    (rung,) = result.rungs
    assert rung.success_rate == 1.0
    assert rung.mean_cost == 0.0
    assert rung.mean_rho_in_band is None
    assert all(row.total_cost == 0 for row in result.rows)


def _fake_result(ns, ys):
    rungs = [
        RungAggregate(
            n=n,
            trials=1,
            success_rate=1.0,
            mean_cost=0.0,
            median_cost=0.0,
            mean_T=y,
            rho_band=(0.0, 1.0),
            in_band_ratios=[],
            mean_rho_in_band=None,
            resolved_config={},
        )
        for n, y in zip(ns, ys)
    ]
    return ExperimentResult(config=_config(), rows=[], rungs=rungs)


def test_fit_scaling_recovers_exact_line():
    ns = [10**2, 10**3, 10**4, 10**5]
    result = _fake_result(ns, [2.0 * math.log(n) + 1.0 for n in ns])
    fit = fit_scaling(result, "log_n", "mean_T")
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert [p[0] for p in fit.points] == ns

    result = _fake_result(ns, [3.0 * math.log(n) ** 3.5 for n in ns])
    fit = fit_scaling(result, "log72_n", "mean_T")
    assert fit.slope == pytest.approx(3.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_scaling_degenerate_and_errors():
    ns = [10**2, 10**3, 10**4]
    flat = _fake_result(ns, [5.0, 5.0, 5.0])
    assert fit_scaling(flat, "log_n", "mean_T").r_squared == 1.0
    with pytest.raises(PrecisionError) as err:
        fit_scaling(_fake_result(ns[:2], [1.0, 2.0]))
    assert err.value.required == 3
    with pytest.raises(ParameterError):
        fit_scaling(_fake_result(ns, [1.0, 2.0, 3.0]), predictor="linear")
    with pytest.raises(ParameterError):
        fit_scaling(_fake_result(ns, [1.0, 2.0, 3.0]), column="no_such")


def test_compare_generators_agreement():
    report = compare_generators(150, 2, 2000, base_seed=1)
    assert report.consistent(alpha=0.01)
    assert report.ks_pvalue > 0.05 and report.chi2_pvalue > 0.05
    d = report.to_dict()
    assert d["n"] == 150 and d["trials"] == 2000 and d["chi2_dof"] > 0


def test_compare_generators_rejects_uniform_control():
    report = compare_generators(150, 2, 2000, base_seed=1, corrupt=True)
    assert report.ks_pvalue < 1e-6
    assert report.chi2_pvalue < 1e-6
    assert not report.consistent()


def test_compare_generators_preconditions():
    with pytest.raises(ParameterError):
        compare_generators(2000, 2, 2000)
    with pytest.raises(ParameterError):
        compare_generators(1, 2, 2000)
    with pytest.raises(ParameterError):
        compare_generators(100, 0, 2000)
    with pytest.raises(PrecisionError) as err:
        compare_generators(150, 2, 100)
    assert err.value.required == 2000


def test_derive_trial_seed_properties():
    seeds = {derive_trial_seed(5, n, t) for n in (100, 200) for t in range(50)}
    assert len(seeds) == 100
    assert derive_trial_seed(5, 100, 7) == derive_trial_seed(5, 100, 7)
    assert derive_trial_seed(5, 100, 7) != derive_trial_seed(6, 100, 7)
