from __future__ import annotations

import csv
import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

import reference
from pasearch import (
    ConsistencyError,
    PAGraph,
    ParameterError,
    PrecisionError,
    bound_eta_lower,
    bound_sum_deviation,
    bound_sum_upper,
    check_degree_concentration,
    check_edge_probability,
    check_interval_concentration,
    check_small_eta_mass,
    check_tail_bounds,
    contraction_statistic,
    degree_relative_errors,
    generate_continuous,
    generate_sequential,
    in_band_ratios,
    max_degree_scaling,
    required_trials,
    small_eta_mass,
)
from pasearch import params
from pasearch.rng import STREAM_ANALYSIS, stream_rng

BOUND_ETA_LOWER_2_HALF = 0.6795704571147614
BOUND_SUM_UPPER_10_2 = 0.046489528076784505
BOUND_SUM_UPPER_10_3 = 0.0001217090602513745
BOUND_SUM_DEV_100_HALF = 0.00048073895283902814


@pytest.fixture(scope="module")
def big_pair():
    return generate_continuous(100000, 16, 13)


# ---------------------------------------------------------------- degrees


def test_degree_relative_errors_by_hand():
    degrees = np.array([4, 2])
    eta = np.array([1.0, 0.5])
    pred, rel = degree_relative_errors(degrees, eta, 4, [1, 2])
    assert np.allclose(pred, [2.0, 0.5 * math.sqrt(2.0)])
    assert np.allclose(rel, [1.0, abs(2.0 / (0.5 * math.sqrt(2.0)) - 1.0)])


def test_degree_concentration_statistics(big_pair):
    graph, realization = big_pair
    cutoff = params.n0(graph.n, graph.m)
    sample = np.unique(np.geomspace(10, int(cutoff), 64).astype(int))
    report = check_degree_concentration(graph, realization, sample)
    assert report.median_rel_error <= 0.15
    assert report.p90_rel_error <= 0.3
    assert report.excluded == 0
    assert len(report.rows) == sample.size
    assert report.index_range == (int(sample[0]), int(sample[-1]))


def test_degree_concentration_excludes_out_of_regime(big_pair, cont_pair):
    graph, realization = big_pair
    cutoff = params.n0(graph.n, graph.m)
    sample = [50, 100, graph.n // 2, graph.n]  # last two above the cutoff
    assert graph.n // 2 > cutoff
    report = check_degree_concentration(graph, realization, sample)
    assert report.excluded == 2
    with pytest.raises(PrecisionError):
        check_degree_concentration(graph, realization, [graph.n - 1, graph.n])
    with pytest.raises(ParameterError):
        check_degree_concentration(graph, realization, [])
    with pytest.raises(ParameterError):
        check_degree_concentration(graph, realization, [0, 5])
    with pytest.raises(ParameterError):
        check_degree_concentration(graph, realization, [graph.n + 1])


def test_pair_consistency_guard(cont_pair):
    graph, realization = cont_pair
    seq = generate_sequential(graph.n, graph.m, graph.seed)
    with pytest.raises(ConsistencyError):
        check_degree_concentration(seq, realization, [10])
    other, _ = generate_continuous(graph.n, graph.m, graph.seed + 1)
    with pytest.raises(ConsistencyError):
        check_degree_concentration(other, realization, [10])


# --------------------------------------------------------------- intervals


def test_interval_concentration_identities(cont_pair):
    _, realization = cont_pair
    report = check_interval_concentration(realization)
    assert report.identities_ok
    assert report.sum_w_residual_rel <= 1e-9
    assert report.eta_residual_rel_max <= 1e-9
    assert report.start_index == math.ceil(params.default_omega(realization.n))
    assert report.indices[0] == report.start_index
    assert report.indices[-1] == realization.n
    assert 0.0 <= report.boundary_gap < 1.0


def test_interval_concentration_errors_shrink(cont_pair):
    _, realization = cont_pair
    report = check_interval_concentration(realization)
    floor = math.ceil(math.log(realization.n) ** 3)
    assert report.max_W_rel_error(floor) <= 0.1
    assert report.median_w_rel_error(floor) <= 0.05
    assert report.max_W_rel_error(floor) <= report.max_W_rel_error()


def test_interval_report_filters(cont_pair):
    _, realization = cont_pair
    report = check_interval_concentration(realization)
    full = report.max_W_rel_error()
    assert full == pytest.approx(float(report.W_rel_error.max()))
    tail = report.W_rel_error[report.indices >= 1000]
    assert report.max_W_rel_error(1000) == pytest.approx(float(tail.max()))


# -------------------------------------------------------------- tail bounds


def test_bound_closed_forms_frozen():
    assert bound_eta_lower(2, 0.5) == pytest.approx(BOUND_ETA_LOWER_2_HALF, rel=1e-12)
    assert bound_sum_upper(10, 2) == pytest.approx(BOUND_SUM_UPPER_10_2, rel=1e-12)
    assert bound_sum_upper(10, 3) == pytest.approx(BOUND_SUM_UPPER_10_3, rel=1e-12)
    assert bound_sum_deviation(100, 0.5) == pytest.approx(
        BOUND_SUM_DEV_100_HALF, rel=1e-12
    )
    assert bound_eta_lower(1, 1.0) == 1.0


def test_bound_parameter_errors():
    for call in (
        lambda: bound_eta_lower(2, 0.0),
        lambda: bound_eta_lower(2, 1.5),
        lambda: bound_sum_deviation(100, 0.0),
        lambda: bound_sum_deviation(100, 1.0),
        lambda: bound_sum_upper(10, 1.0),
        lambda: required_trials(0.0),
        lambda: required_trials(1.5),
    ):
        with pytest.raises(ParameterError):
            call()


def test_required_trials_scale():
    assert required_trials(1.0) == 1
    assert required_trials(0.5) == 900
    # three sigmas at the bound stay below a tenth of the bound
    b = 0.01
    t = required_trials(b)
    assert 3.0 * math.sqrt(b * (1.0 - b) / t) <= b / 10.0 + 1e-12


def test_tail_bounds_rows_and_escalation():
    rng = stream_rng(5, STREAM_ANALYSIS)
    report = check_tail_bounds(
        [2, 5],
        {"x": [0.25, 0.5], "alpha": [0.5], "beta": [2], "alpha_N": 100, "beta_N": 10},
        10**4,
        rng,
    )
    kinds = [r.kind for r in report.rows]
    assert kinds == ["eta_lower"] * 4 + ["sum_deviation", "sum_upper"]
    assert report.requested_trials == 10**4
    assert report.all_satisfied
    by_key = {(r.kind, r.m, r.parameter): r for r in report.rows}
    assert by_key[("sum_upper", 10, 2.0)].bound == pytest.approx(BOUND_SUM_UPPER_10_2)
    # the sum_upper bound is too small for 10^4 trials, so the row escalates
    assert by_key[("sum_upper", 10, 2.0)].trials == required_trials(BOUND_SUM_UPPER_10_2)
    assert by_key[("eta_lower", 2, 0.5)].trials == 10**4
    # empirical lower tail matches the Erlang CDF at the cut point
    row = by_key[("eta_lower", 2, 0.5)]
    exact = reference.erlang_cdf(2, 1.0)
    assert abs(row.empirical - exact) <= 5.0 * math.sqrt(exact * (1 - exact) / row.trials)


def test_tail_bounds_escalation_refusal():
    rng = stream_rng(5, STREAM_ANALYSIS)
    with pytest.raises(PrecisionError) as err:
        check_tail_bounds([2], {"beta": [3], "beta_N": 10}, 10**4, rng, escalate=False)
    assert err.value.required == required_trials(BOUND_SUM_UPPER_10_3)


def test_tail_bounds_parameter_errors(rng):
    with pytest.raises(ParameterError):
        check_tail_bounds([2], {}, 10**4, rng)
    with pytest.raises(ParameterError):
        check_tail_bounds([2], {"x": [0.5]}, 0, rng)


# -------------------------------------------------------- edge probability


def test_edge_probability_matches_prediction():
    rng = stream_rng(1, STREAM_ANALYSIS)
    report = check_edge_probability(2000, 5, 50, 500, 40000, rng)
    assert abs(report.ratio - 1.0) <= 0.15
    assert report.empirical > 0
    assert sum(r[2] for r in report.bucket_rows) == report.trials
    for _, _, count, emp, pred, ratio in report.bucket_rows:
        assert count > 0 and pred > 0
        assert math.isfinite(ratio)


def test_edge_probability_preconditions(rng):
    with pytest.raises(ParameterError):
        check_edge_probability(2000, 5, 2, 500, 40000, rng)  # i below omega
    with pytest.raises(ParameterError):
        check_edge_probability(2000, 5, 500, 50, 40000, rng)  # i >= j
    with pytest.raises(ParameterError):
        check_edge_probability(2000, 5, 50, 500, 5000, rng)
    with pytest.raises(PrecisionError) as err:
        check_edge_probability(10**6, 1, 900000, 10**6, 10**4, rng)
    assert err.value.required == math.ceil(
        100.0 * 2.0 * math.sqrt(900000.0 * 10**6)
    )


# ----------------------------------------------------------- small-eta mass


def test_small_eta_mass_by_hand():
    n, m = 100, 2
    lam = params.lambda0(n, m)
    v0 = math.ceil(params.default_omega(n))
    assert v0 == 2
    eta = np.full(n, 1.0)
    eta[9] = 0.01  # vertex 10 is the only small block
    W = np.sqrt(np.arange(n + 1) / n)
    lam_out, mass, ratios, small = small_eta_mass(eta, W, n, m, [5, 10, 50, 100])
    assert lam_out == lam
    assert small == 1
    term = lam / (2.0 * m * math.sqrt(10.0 * n))
    assert np.allclose(mass, [0.0, term, term, term])
    expect = [0.0] + [term * math.log(n) / W[c] for c in (10, 50, 100)]
    assert np.allclose(ratios, expect)


def test_small_eta_mass_zero_when_no_small_blocks():
    n, m = 100, 2
    eta = np.full(n, 1.0)
    W = np.sqrt(np.arange(n + 1) / n)
    _, mass, ratios, small = small_eta_mass(eta, W, n, m, [10, 100])
    assert small == 0
    assert not mass.any() and not ratios.any()


def test_check_small_eta_mass_report(cont_pair):
    _, realization = cont_pair
    n = realization.n
    floor = math.ceil(math.log(n) ** 3)
    report = check_small_eta_mass(realization, [floor, n // 2, n])
    lam = params.lambda0(n, realization.m)
    assert report.threshold == pytest.approx(lam)
    assert report.small_blocks == int((realization.eta <= lam).sum())
    assert report.max_ratio == pytest.approx(max(report.ratios))
    assert report.checkpoints == [floor, n // 2, n]
    with pytest.raises(ParameterError):
        check_small_eta_mass(realization, [floor - 1])
    with pytest.raises(ParameterError):
        check_small_eta_mass(realization, [])


# ------------------------------------------------------------- contraction


def _trace(seq):
    return SimpleNamespace(climb_sequence=list(seq))


def test_in_band_ratios_by_hand():
    traces = [_trace([100, 50, 30, 10]), _trace([7])]
    out = in_band_ratios(traces, lambda h: h, (40, 200))
    assert out == [0.5, 0.6]


def test_contraction_statistic_by_hand():
    report = contraction_statistic(
        [_trace([100, 50, 30, 10])], lambda h: h, (40, 200), min_steps=2
    )
    assert report.mean == pytest.approx(0.55)
    assert report.count == 2
    assert 0.5 <= report.ci_low <= report.mean <= report.ci_high <= 0.6
    assert report.band == (40.0, 200.0)


def test_contraction_per_trace_resolvers():
    traces = [_trace([1, 2]), _trace([3, 4])]
    resolvers = [{1: 100, 2: 50}.__getitem__, {3: 80, 4: 40}.__getitem__]
    report = contraction_statistic(traces, resolvers, (40, 200), min_steps=2)
    assert report.count == 2
    assert report.mean == pytest.approx(0.5)


def test_contraction_errors():
    with pytest.raises(ParameterError):
        contraction_statistic([_trace([100, 50])], lambda h: h, (5, 2))
    with pytest.raises(PrecisionError) as err:
        contraction_statistic([_trace([100, 50])], lambda h: h, (40, 200))
    assert err.value.required == 30


# ------------------------------------------------------- max degree scaling


def test_max_degree_single_vertex():
    g = PAGraph(n=1, m=1, seed=0, construction="sequential",
                left=np.array([1], dtype=np.uint32))
    report = max_degree_scaling([g])
    (row,) = report.rows
    assert row == (1, 1, 0, 2, 2.0, 1)


def test_max_degree_scaling_statistics():
    graphs = [generate_sequential(20000, 8, s) for s in range(10)]
    report = max_degree_scaling(graphs)
    ranks = [r[5] for r in report.rows]
    assert sum(rank <= 10 for rank in ranks) >= 8
    for ratio in report.ratios():
        assert 0.5 < ratio < 50.0


# ------------------------------------------------------------------ exports


def test_report_exports(tmp_path, cont_pair):
    graph, realization = cont_pair
    report = check_degree_concentration(graph, realization, [3])
    csv_path = tmp_path / "deg.csv"
    json_path = tmp_path / "deg.json"
    report.to_csv(csv_path)
    report.to_json(json_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["i", "degree", "eta", "prediction", "rel_error"]
    assert len(rows) == 1 + len(report.rows)
    payload = json.loads(json_path.read_text())
    assert payload["rows"] == len(report.rows)
    assert payload["median_rel_error"] == report.median_rel_error

    tails = check_tail_bounds([2], {"x": [0.5]}, 10**4, stream_rng(2, STREAM_ANALYSIS))
    tails.to_csv(tmp_path / "tails.csv")
    tails.to_json(tmp_path / "tails.json")
    payload = json.loads((tmp_path / "tails.json").read_text())
    assert payload["all_satisfied"] is True
    assert len(payload["rows"]) == 1
