"""
Unit tests for role embeddings, DTW path differences and the dynamic threshold.
"""

import math

import numpy as np
import pytest
import torch

from detector_beam import (
    BeamDetector,
    EmbeddingParams,
    EmbeddingTable,
    ThresholdState,
    cost_matrix,
    detect_change,
    dtw,
    hierarchy_agreement,
    path_difference,
    role_difference,
    train_embedding,
    update_threshold,
    window_threshold,
)
from detector_beam.embedding import _negative_mask, _pair_keys
from exceptions import (
    EstimationError,
    InvalidScenarioError,
    NotFoundError,
    ParseError,
    ThresholdNotInitializedError,
    TrainingError,
)
from routing_sim import RouteChange
from topology.as_graph import AsGraph
from topology.prefixes import parse_prefix

PREFIX = parse_prefix('10.0.0.0/16')


def brute_force_dtw(cost):
    """Minimum over every monotone alignment path, enumerated explicitly."""
    n, m = cost.shape
    best = math.inf

    def walk(i, j, total):
        nonlocal best
        total += cost[i, j]
        if (i, j) == (n - 1, m - 1):
            best = min(best, total)
            return
        if i + 1 < n:
            walk(i + 1, j, total)
        if j + 1 < m:
            walk(i, j + 1, total)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, total)

    walk(0, 0, 0.0)
    return best


def change(old, new, time=0):
    return RouteChange(PREFIX, old, new, time)


@pytest.fixture
def line_table():
    """ASes 1-4 on a line at x = 0, 1, 2, 10."""
    vectors = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [10.0, 0.0]])
    return EmbeddingTable([1, 2, 3, 4], vectors, np.zeros(4), lam=1.0)


class TestScoring:
    """Test suite for role and path differences."""

    @pytest.mark.parametrize('seed', range(500))
    def test_dtw_matches_exhaustive_alignment(self, seed):
        rng = np.random.default_rng(seed)
        cost = rng.random((int(rng.integers(1, 7)), int(rng.integers(1, 7))))
        assert dtw(cost) == pytest.approx(brute_force_dtw(cost))

    def test_role_difference(self):
        table = EmbeddingTable([1, 2, 3], np.array([[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]),
                               np.array([0.0, 0.0, 1.0]), lam=2.0)
        assert role_difference(table, 1, 2) == pytest.approx(5.0)
        assert role_difference(table, 1, 3) == pytest.approx(2.0)
        assert role_difference(table, 1, 3, lam=0.0) == 0.0
        assert cost_matrix(table, [1, 2], [1, 3]) == pytest.approx(np.array([[0.0, 2.0], [5.0, 7.0]]))

    def test_path_difference(self):
        table = EmbeddingTable([1, 2, 3], np.array([[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]),
                               np.array([0.0, 0.0, 1.0]), lam=2.0)
        assert path_difference(table, change((1, 2), (1, 3))) == pytest.approx(3.5)
        assert path_difference(table, change((1, 2), (1, 2))) == 0.0

    def test_longer_path_normalisation(self, line_table):
        assert path_difference(line_table, change((1, 2), (1, 4))) == pytest.approx(4.0)
        assert path_difference(line_table, change((1,), (1, 2, 3))) == pytest.approx(1.0)

    def test_unknown_as(self, line_table):
        with pytest.raises(NotFoundError):
            path_difference(line_table, change((1, 2), (1, 99)))


class TestThreshold:
    """Test suite for the windowed threshold."""

    def test_closed_form(self):
        assert window_threshold([1.0, 2.0, 3.0], 3.0) == pytest.approx(2.0 + 3.0 * math.sqrt(2.0 / 3.0))
        assert window_threshold([4.0], 3.0) == 4.0

    def test_window_roll(self):
        state = update_threshold(ThresholdState(window_seconds=10), 3)
        assert state.boundary == 0 and state.theta is None
        for t, s in [(3, 1.0), (5, 2.0), (9, 3.0)]:
            state = state.add(t, s)
        state = update_threshold(state, 12)
        assert state.theta == pytest.approx(window_threshold([1.0, 2.0, 3.0], 3.0))
        assert state.boundary == 10
        assert state.scores == ()

    def test_empty_window_keeps_theta(self):
        state = ThresholdState(window_seconds=10, theta=0.7, boundary=10)
        assert update_threshold(state, 25).theta == 0.7

    def test_jump_closes_open_window(self):
        state = ThresholdState(window_seconds=3600, k=1.0, theta=5.0, boundary=0, scores=((10, 0.0), (20, 2.0)))
        jumped = update_threshold(state, 7300)
        assert jumped.theta == pytest.approx(window_threshold([0.0, 2.0], 1.0))
        assert jumped.boundary == 7200
        assert jumped.scores == ()

    def test_time_cannot_go_back(self):
        with pytest.raises(InvalidScenarioError):
            update_threshold(ThresholdState(window_seconds=10, boundary=20), 5)

    @pytest.mark.parametrize('seed', range(200))
    def test_high_scores_never_lower_threshold(self, seed):
        rng = np.random.default_rng(seed)
        scores = list(rng.exponential(1.0, size=int(rng.integers(2, 40))))
        theta = window_threshold(scores, 3.0)
        above = theta + rng.exponential(1.0)
        assert window_threshold(scores + [above], 3.0) >= theta - 1e-9
        assert window_threshold(scores + [theta], 3.0) >= theta - 1e-9
        assert window_threshold(scores + [float(np.mean(scores))], 3.0) <= theta + 1e-9

    def test_uninitialised(self, line_table):
        with pytest.raises(ThresholdNotInitializedError):
            detect_change(line_table, ThresholdState(), change((1, 2), (1, 3), time=5))

    def test_flagged_scores_excluded_unless_asked(self, line_table):
        state = ThresholdState(window_seconds=10, theta=1.0, boundary=0)
        score, flagged, excluded = detect_change(line_table, state, change((1, 2), (1, 4), time=3))
        assert flagged and score == pytest.approx(4.0)
        assert excluded.scores == ()
        _, _, included = detect_change(line_table, ThresholdState(10, 3.0, True, 1.0, 0),
                                       change((1, 2), (1, 4), time=3))
        assert included.scores == ((3, pytest.approx(4.0)),)


class TestBeamDetector:
    """Test suite for the detector wrapper."""

    @pytest.fixture
    def warmed(self, line_table):
        detector = BeamDetector(line_table, window_seconds=10)
        detector.warm_up([change((1, 2), (1, 3), t) for t in (0, 1, 2)] + [change((1, 2), (1, 2), 3)], end=10)
        return detector

    def test_warm_up_threshold(self, warmed):
        assert warmed.theta == pytest.approx(window_threshold([0.5, 0.5, 0.5, 0.0], 3.0))

    def test_warm_up_needs_changes(self, line_table):
        with pytest.raises(EstimationError):
            BeamDetector(line_table).warm_up([])

    def test_warm_up_needs_a_full_window(self, line_table):
        detector = BeamDetector(line_table, window_seconds=10)
        with pytest.raises(EstimationError):
            detector.warm_up([change((1, 2), (1, 3), t) for t in (2, 9)])
        assert detector.theta is None

    def test_warm_up_leaves_partial_window_open(self, line_table):
        detector = BeamDetector(line_table, window_seconds=10)
        theta = detector.warm_up([change((1, 2), (1, 3), 1), change((1, 2), (1, 4), 12)])
        assert theta == pytest.approx(0.5)
        assert detector.state.boundary == 10
        assert detector.state.scores == ((12, pytest.approx(4.0)),)

    def test_run_flags_large_changes(self, warmed):
        rows = warmed.run([change((1, 2), (1, 3), 13), change((1, 2), (1, 4), 12)])
        assert [(r.time, r.flagged) for r in rows] == [(12, True), (13, False)]
        log = warmed.score_log()
        assert list(log.columns) == ['time', 'prefix', 'score', 'theta', 'flagged']
        assert log['prefix'].tolist() == ['10.0.0.0/16'] * 2

    def test_copy_has_own_log(self, warmed):
        clone = warmed.copy()
        clone.run([change((1, 2), (1, 3), 13)])
        assert warmed.log == []
        assert clone.theta == warmed.theta


class TestEmbedding:
    """Test suite for role embedding training and storage."""

    @pytest.fixture(scope='class')
    def params(self):
        return EmbeddingParams(dimension=4, epochs=300, batch_size=64)

    def test_hierarchy_respected(self, small_graph, params):
        table = train_embedding(small_graph, params, seed=1)
        assert table.asns == tuple(range(1, 8))
        assert table.d == 4
        assert hierarchy_agreement(table, small_graph) == 1.0

    def test_negative_pairs_skip_neighbours(self):
        n = 100_000
        positives = torch.tensor([[0, 1], [99_999, 5]], dtype=torch.int64)
        keys = _pair_keys(positives, n)
        assert keys.tolist() == sorted([1, n, 99_999 * n + 5, 5 * n + 99_999])
        heads = torch.tensor([0, 1, 5, 3, 7, 99_999])
        tails = torch.tensor([1, 0, 99_999, 3, 8, 4])
        assert _negative_mask(heads, tails, keys, n).tolist() == [False, False, False, False, True, True]

    def test_deterministic(self, small_graph):
        params = EmbeddingParams(dimension=3, epochs=5)
        assert train_embedding(small_graph, params, seed=2) == train_embedding(small_graph, params, seed=2)

    def test_text_document(self, small_graph):
        table = train_embedding(small_graph, EmbeddingParams(dimension=3, epochs=3, lam=0.5), seed=3)
        restored = EmbeddingTable.from_text(table.to_text())
        assert restored == table
        assert restored.lam == 0.5

    def test_bad_text(self):
        with pytest.raises(ParseError):
            EmbeddingTable.from_text("2 1.0\n1 0.0 0.0\n")
        with pytest.raises(ParseError):
            EmbeddingTable.from_text("")

    def test_invalid_training_input(self, small_graph):
        with pytest.raises(TrainingError):
            train_embedding(AsGraph())
        with pytest.raises(TrainingError):
            train_embedding(small_graph, EmbeddingParams(dimension=1))

    def test_params_from_dict(self):
        params = EmbeddingParams.from_dict({'dimension': 16, 'lambda': 0.25})
        assert (params.dimension, params.lam, params.epochs) == (16, 0.25, 50)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
