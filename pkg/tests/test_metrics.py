import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specgl.graph import Graph
from specgl.metrics import (TRIAL_FIELDS, EdgeScore, TrialRecord, aggregate, f_measure,
                            trials_to_csv)


def g(n, edges):
    return Graph.from_edges(n, edges)


def test_identical_graphs():
    s = f_measure(g(3, [(0, 1), (1, 2)]), g(3, [(0, 1), (1, 2)]))
    assert (s.precision, s.recall, s.f_measure) == (1.0, 1.0, 1.0)
    assert not s.vacuous


def test_half_overlap():
    s = f_measure(g(3, [(0, 1), (1, 2)]), g(3, [(0, 1), (0, 2)]))
    assert (s.precision, s.recall, s.f_measure) == (0.5, 0.5, 0.5)
    assert (s.true_positives, s.false_positives, s.false_negatives) == (1, 1, 1)


def test_empty_learned_graph():
    s = f_measure(Graph(3), g(3, [(0, 1)]))
    assert s.f_measure == 0.0 and s.recall == 0.0


def test_both_empty_is_vacuous():
    s = f_measure(Graph(3), Graph(3))
    assert s.f_measure == 1.0 and s.vacuous


def test_weights_ignored():
    s = f_measure(g(2, [(0, 1, 0.1)]), g(2, [(0, 1, 5.0)]))
    assert s.f_measure == 1.0


def test_vertex_count_mismatch():
    with pytest.raises(ValueError):
        f_measure(Graph(3), Graph(4))


def _f_oracle(learned, truth):
    # harmonic mean written from counts, independent of the implementation
    tp = len(learned & truth)
    if tp == 0:
        return 0.0
    return 2 * tp / (len(learned) + len(truth))


edge_sets = st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6))
                    .filter(lambda e: e[0] != e[1]).map(lambda e: tuple(sorted(e))),
                    max_size=15)


@given(edge_sets, edge_sets)
def test_f_matches_count_formula_and_is_symmetric(a, b):
    ga, gb = g(7, a), g(7, b)
    s, t = f_measure(ga, gb), f_measure(gb, ga)
    assert s.precision == t.recall and s.recall == t.precision
    assert s.f_measure == pytest.approx(t.f_measure)
    if a or b:
        assert s.f_measure == pytest.approx(_f_oracle(set(a), set(b)))


@given(edge_sets, edge_sets, st.permutations(range(7)))
def test_f_invariant_to_relabeling(a, b, perm):
    relabel = lambda es: [(perm[i], perm[j]) for i, j in es]
    before = f_measure(g(7, a), g(7, b)).f_measure
    after = f_measure(g(7, relabel(a)), g(7, relabel(b))).f_measure
    assert before == pytest.approx(after)


def rec(model, noise, f, status="ok", sparsity=None):
    score = None if f is None else EdgeScore(f, f, f, 0, 0, 0)
    return TrialRecord(model, noise, sparsity, 1, 2, 5, score, status)


def test_aggregate_single_record():
    (cell,) = aggregate([rec("RBF", 0.3, 0.7)])
    assert (cell.mean_f, cell.std_f, cell.count) == (0.7, 0.0, 1)


def test_aggregate_two_records():
    (cell,) = aggregate([rec("ER", 0.3, 0.0), rec("ER", 0.3, 1.0)])
    assert cell.mean_f == 0.5
    assert cell.std_f == 0.5


def test_aggregate_ordering_and_failures():
    rows = aggregate([rec("RBF", 0.3, 0.9), rec("BA", 0.3, 0.5), rec("BA", 0.0, 0.8),
                      rec("BA", 0.0, None, status="degenerate")])
    assert [(r.model, r.axis_value) for r in rows] == [("BA", 0.0), ("BA", 0.3), ("RBF", 0.3)]
    assert rows[0].count == 1 and rows[0].failures == 1 and rows[0].scheduled == 2


def test_aggregate_all_failed_cell():
    (cell,) = aggregate([rec("ER", 0.3, None, status="numerical")])
    assert math.isnan(cell.mean_f) and cell.failures == 1


def test_aggregate_sparsity_axis():
    rows = aggregate([rec("ER", 0.0, 0.9, sparsity=2), rec("ER", 0.0, 0.3, sparsity=12)],
                     axis="sparsity")
    assert [r.axis_value for r in rows] == [2.0, 12.0]


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([rec("ER", 0.0, 1.0)], axis="bogus")


def test_aggregate_mean_matches_numpy():
    rng = np.random.default_rng(0)
    fs = rng.random(37)
    (cell,) = aggregate([rec("RBF", 0.1, float(f)) for f in fs])
    assert cell.mean_f == pytest.approx(fs.mean(), abs=1e-15)
    assert cell.std_f == pytest.approx(fs.std(), abs=1e-15)


def test_trials_csv_header():
    text = trials_to_csv([rec("ER", 0.3, 0.5), rec("ER", 0.3, None, status="degenerate")])
    lines = text.splitlines()
    assert lines[0].split(",") == TRIAL_FIELDS
    assert len(lines) == 3
