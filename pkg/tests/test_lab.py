import json
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algturan import lab
from algturan.construct import params
from algturan.gf import field_of_order
from algturan.sympoly import SymmetricPolynomial, evaluation_row


def test_exact_small_cases():
    F = field_of_order(11)
    assert lab.vanishing_prob_exact(F, 2, 2, 8, []).probability == 1
    assert lab.vanishing_prob_exact(F, 2, 2, 8, [[[3, 4], [5, 6]]]).probability == Fraction(1, 11)
    U = [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]
    res = lab.vanishing_prob_exact(F, 2, 2, 8, U)
    assert res.rank == 2 and res.probability == Fraction(1, 121) and res.guards_hold


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([11, 13]), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_exact_rank_equals_size_under_guards(q, size, seed):
    F = field_of_order(q)
    U = lab.random_guarded_U(F, 2, 2, size, np.random.default_rng(seed))
    res = lab.vanishing_prob_exact(F, 2, 2, 8, U, strict=True)
    assert res.guards_hold
    assert res.rank == size and res.probability == Fraction(1, q**size)


def test_guard_violation_warns_or_raises():
    F = field_of_order(3)
    U = [[[0], [1]], [[0], [2]], [[1], [2]]]
    with pytest.warns(lab.GuardViolation):
        res = lab.vanishing_prob_exact(F, 2, 1, 4, U)
    assert not res.guards_hold
    with pytest.raises(lab.GuardViolation):
        lab.vanishing_prob_exact(F, 2, 1, 4, U, strict=True)


def test_duplicate_tuples_rejected():
    F = field_of_order(5)
    with pytest.raises(ValueError):
        lab.vanishing_prob_exact(F, 2, 1, 4, [[[0], [1]], [[1], [0]]])


@pytest.mark.parametrize("q", [4, 7, 9])
def test_tensor_row_matches_member_row(q):
    F = field_of_order(q)
    rng = np.random.default_rng(q)
    for _ in range(10):
        tup = rng.integers(0, q, (3, 2))
        assert np.array_equal(lab._row_by_tensor(F, 3, 2, 3, tup), evaluation_row(F, 3, 2, 3, tup))


def test_monte_carlo_agrees_with_exact():
    F = field_of_order(5)
    U = [[[0, 0], [1, 0]], [[0, 0], [2, 2]]]
    exact = float(lab.vanishing_prob_exact(F, 2, 2, 8, U).probability)
    mc = lab.vanishing_prob_monte_carlo(F, 2, 2, 8, U, 100_000, 3)
    se = math.sqrt(exact * (1 - exact) / mc["samples"])
    assert abs(mc["frequency"] - exact) <= 4 * se


def test_monte_carlo_guard_failure_still_matches_rank():
    # outside the guards the rank can drop; sampling must track the rank, not |U|
    F = field_of_order(3)
    U = [[[0], [1]], [[0], [2]], [[1], [2]]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lab.GuardViolation)
        exact = float(lab.vanishing_prob_exact(F, 2, 1, 1, U).probability)
    mc = lab.vanishing_prob_monte_carlo(F, 2, 1, 1, U, 50_000, 4)
    assert abs(mc["frequency"] - exact) <= 4 * math.sqrt(exact * (1 - exact) / 50_000)


def test_expectation_suite_model_c():
    p = params("C", 3, [2], 3, h=2)
    rep = lab.expectation_suite(p, field_of_order(3), 200, 5)
    assert rep.references["expected_edges"]["value"] == 54
    assert abs(rep.aggregate()["edges"]["mean"] - 54) <= 5.4


def test_h1_multi_edges_zero():
    p = params("A", 2, [2], 5, h=1)
    rep = lab.expectation_suite(p, field_of_order(5), 20, 1)
    assert all(r.multi_edges == 0 for r in rep.records)
    assert rep.references["multi_edge_bound"]["value"] == 0


def test_multi_edge_check():
    p = params("A", 2, [2], 5, h=2)
    rep = lab.expectation_suite(p, field_of_order(5), 200, 2)
    assert lab.multi_edge_check(rep)["ok"]


def test_stderr_halves_when_trials_quadruple():
    p = params("A", 2, [2], 5, h=1)
    F = field_of_order(5)
    se1 = lab.expectation_suite(p, F, 100, 9).aggregate()["edges"]["stderr"]
    se4 = lab.expectation_suite(p, F, 400, 10).aggregate()["edges"]["stderr"]
    assert 0.35 < se4 / se1 < 0.7


def test_threads_do_not_change_reports():
    p = params("A", 2, [2], 5, h=2)
    F = field_of_order(5)
    a = lab.expectation_suite(p, F, 12, 3, thresholds=[3], cleanup_threshold=4, threads=1)
    b = lab.expectation_suite(p, F, 12, 3, thresholds=[3], cleanup_threshold=4, threads=3)
    assert lab.report_json(a) == lab.report_json(b)


def test_report_io(tmp_path):
    p = params("B", 3, [2], 3, h=2)
    rep = lab.expectation_suite(p, field_of_order(3), 6, 1, thresholds=[2], cleanup_threshold=4)
    path = tmp_path / "r.json"
    lab.emit_report(rep, "json", path)
    back = lab.load_report(path)
    assert back == rep
    assert lab.report_json(back) == path.read_text()
    lab.emit_report(rep, "csv", tmp_path / "r.csv")
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert len(rows) == 1 + rep.trials
    with pytest.raises(ValueError):
        lab.emit_report(rep, "xml", tmp_path / "r.xml")


def test_empty_report():
    p = params("A", 2, [2], 5)
    rep = lab.expectation_suite(p, field_of_order(5), 0, 1)
    doc = json.loads(lab.report_json(rep))
    assert doc["trials"] == 0 and doc["records"] == []
    assert lab.report_csv(rep).count("\n") == 1


def _const_layers(p, F, c):
    poly = SymmetricPolynomial.constant(F, p.r, p.dim, p.d_used, c)
    return lambda i: [[poly] * p.npolys for _ in range(p.h)]


def test_moment_of_edgeless_layers_is_zero():
    for model, r, inputs, q in [("A", 2, [2], 5), ("B", 3, [2], 3), ("C", 3, [2], 3)]:
        p = params(model, r, inputs, q, h=2)
        F = field_of_order(q)
        m = lab.moment_estimate(p, F, 2, 10, 1, layer_source=_const_layers(p, F, 1))
        assert m.mean == 0 and set(m.values) == {0}


def test_first_moment_model_a():
    p = params("A", 2, [2], 5, h=1)
    m = lab.moment_estimate(p, field_of_order(5), 1, 500, 11)
    assert abs(m.mean - 23 / 25) <= 5 * m.stderr


def test_fourth_moment_bounded():
    res = lab.moment_trend("A", 2, [2], [3, 5, 7, 11], 1, 4, 300, 13)
    cap = 2 * res[-1].mean
    assert all(m.mean <= cap for m in res)


def test_dichotomy_stubs():
    p = params("A", 2, [2], 5)
    F = field_of_order(5)
    rep = lab.dichotomy_probe(p, F, 8, 1, layer_source=_const_layers(p, F, 2))
    assert rep.histogram == {"0": 8}
    rep = lab.dichotomy_probe(p, F, 8, 1, layer_source=_const_layers(p, F, 0))
    assert rep.histogram == {"23": 8}
    assert rep.above_min == 23 >= rep.cutoff


def test_summarize_dichotomy():
    s = lab.summarize_dichotomy([0, 0, 1, 2, 5, 20], 25)
    assert s["small_cluster_max"] == 2
    assert s["middle_band"] == [5] and not s["middle_band_empty"]
    assert s["below_max"] == 5 and s["above_min"] == 20
    assert sum(s["histogram"].values()) == 6


def test_dichotomy_report_integrity():
    p = params("A", 2, [2], 7)
    rep = lab.dichotomy_probe(p, field_of_order(7), 150, 2, threads=2)
    assert sum(rep.histogram.values()) == 150
    assert rep.small_cluster_max is not None and rep.cutoff == 3.5
    assert len(lab.report_csv(rep).splitlines()) == 1 + len(rep.histogram)


def test_scaling_needs_two_orders():
    with pytest.raises(lab.InsufficientPoints):
        lab.scaling_fit("A", 2, [2], [5, 5], 1, 3, 1)


def test_scaling_small_fit():
    res = lab.scaling_fit("A", 2, [2], [5, 7, 11], 1, 10, 1)
    assert [pt["q"] for pt in res.points] == [5, 7, 11]
    assert res.target == 1.5 and 1.2 < res.slope < 1.8
    assert all(pt["threshold"] == 64 for pt in res.points)
    assert json.loads(lab.report_json(res))["slope"] == res.slope


def test_degree_threshold():
    assert lab.degree_threshold(params("A", 2, [2], 5, h=2)) == 64 * 4
    assert lab.degree_threshold(params("C", 3, [2], 3)) == 144
