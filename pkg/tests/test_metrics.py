import numpy as np
import pytest

from gaedag.metrics import BinaryGraph, aggregate, is_dag, shd, threshold, tpr


def _graph(edge_list, d):
    E = np.zeros((d, d), dtype=bool)
    for i, j in edge_list:
        E[i, j] = True
    return BinaryGraph(E)


def test_threshold_zero_matrix_is_empty():
    g = threshold(np.zeros((4, 4)), 0.3)
    assert g.edge_count() == 0
    assert g.repairs == 0


def test_threshold_is_strict():
    A = np.zeros((3, 3))
    A[0, 1] = 0.5
    assert threshold(A, 0.3).edge_count() == 1
    assert threshold(A, 0.5).edge_count() == 0  # strict inequality
    assert threshold(A, 0.6).edge_count() == 0


def test_threshold_drops_self_loops():
    A = np.eye(3) * 2.0
    assert threshold(A, 0.3).edge_count() == 0


def test_threshold_repairs_two_cycle_keeping_heavier_edge():
    A = np.zeros((2, 2))
    A[0, 1] = 0.9
    A[1, 0] = 0.4
    g = threshold(A, 0.3)
    assert g.repairs == 1
    assert g.edges[0, 1] and not g.edges[1, 0]


def test_threshold_repair_longer_cycle():
    A = np.zeros((3, 3))
    A[0, 1] = 1.0
    A[1, 2] = 0.6
    A[2, 0] = 0.5  # weakest edge on the 3-cycle
    g = threshold(A, 0.3)
    assert is_dag(g)
    assert g.repairs == 1
    assert not g.edges[2, 0]


def test_threshold_monotone_in_tau():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 8))
    counts = [threshold(A, tau).edge_count() for tau in (0.0, 0.2, 0.5, 1.0, 2.0)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_threshold_rejects_negative_tau():
    with pytest.raises(ValueError, match=">= 0"):
        threshold(np.zeros((2, 2)), -0.1)


def test_is_dag_cases():
    assert is_dag(_graph([], 3))
    assert not is_dag(_graph([(0, 1), (1, 2), (2, 0)], 3))
    rng = np.random.default_rng(1)
    upper = np.triu(rng.random((5, 5)) < 0.7, 1)
    assert is_dag(upper)
    assert not is_dag(_graph([(0, 0)], 2))  # self-loop is a 1-cycle


def test_shd_identical_graphs():
    g = _graph([(0, 1), (1, 2)], 3)
    m = shd(g, g)
    assert m.shd == 0 and m.extra == 0 and m.missing == 0 and m.reversed == 0
    assert m.tpr == 1.0


def test_shd_single_reversal_counts_once():
    pred = _graph([(1, 0)], 2)
    truth = _graph([(0, 1)], 2)
    m = shd(pred, truth)
    assert m.shd == 1 and m.reversed == 1 and m.extra == 0 and m.missing == 0


def test_shd_missing_edge():
    truth = _graph([(0, 1), (1, 2)], 3)
    pred = _graph([(0, 1)], 3)
    m = shd(pred, truth)
    assert m.shd == 1 and m.missing == 1


def test_shd_extra_edge():
    truth = _graph([(0, 1)], 3)
    pred = _graph([(0, 1), (2, 0)], 3)
    m = shd(pred, truth)
    assert m.shd == 1 and m.extra == 1


def test_shd_symmetry():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = BinaryGraph(np.triu(rng.random((5, 5)) < 0.4, 1))
        b = BinaryGraph(np.triu(rng.random((5, 5)) < 0.4, 1).T)
        assert shd(a, b).shd == shd(b, a).shd


def test_shd_dimension_mismatch():
    with pytest.raises(ValueError, match="size mismatch"):
        shd(_graph([], 3), _graph([], 4))


def test_tpr_cases():
    truth = _graph([(0, 1), (1, 2)], 3)
    assert tpr(truth, truth) == 1.0
    assert tpr(_graph([], 3), truth) == 0.0
    # one correct, one reversed -> 0.5
    pred = _graph([(0, 1), (2, 1)], 3)
    assert tpr(pred, truth) == 0.5


def test_tpr_rejects_empty_truth():
    with pytest.raises(ValueError, match="empty truth"):
        tpr(_graph([(0, 1)], 2), _graph([], 2))


def test_aggregate_single_run_has_zero_std():
    from gaedag.metrics import GraphMetrics

    runs = [GraphMetrics(2, 0.5, 1, 1, 0, 3.0)]
    s = aggregate(runs)
    assert s.shd_mean == 2.0 and s.shd_std == 0.0
    assert s.wall_time_mean == 3.0


def test_aggregate_mean_and_sample_std():
    from gaedag.metrics import GraphMetrics

    runs = [GraphMetrics(2, 1.0, 0, 0, 0, 1.0), GraphMetrics(4, 0.5, 0, 0, 0, 2.0)]
    s = aggregate(runs)
    assert s.shd_mean == 3.0
    assert s.shd_std == pytest.approx(np.sqrt(2.0))
    assert s.tpr_mean == 0.75


def test_aggregate_equal_runs_zero_std():
    from gaedag.metrics import GraphMetrics

    runs = [GraphMetrics(3, 0.8, 1, 1, 1, 1.5)] * 4
    s = aggregate(runs)
    assert s.shd_std == 0.0 and s.tpr_std == 0.0


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])


def test_threshold_output_is_always_dag():
    rng = np.random.default_rng(3)
    for _ in range(30):
        A = rng.normal(size=(7, 7))
        assert is_dag(threshold(A, 0.2))
