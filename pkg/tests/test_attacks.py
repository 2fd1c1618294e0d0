"""
Unit tests for knowledge-base poisoning, oscillation multipliers and threshold pollution.
"""

import numpy as np
import pytest

from attacks import (
    AttackSpec,
    OscillationModel,
    PlannerWeights,
    PoisonPlan,
    SimContext,
    amplify,
    augment_transit,
    estimate_beam_threshold,
    evaluate_pollution,
    execute_dfoh_attack,
    extend_paths,
    hijack_candidates,
    plan_dfoh_poisoning,
    plan_threshold_pollution,
    poison_candidates,
    rank_candidates,
)
from attacks.threshold_pollution import FEASIBLE, PARTIAL
from detector_beam import BeamDetector, EmbeddingTable, path_difference, window_threshold
from detector_dfoh import DfohDetector, Forest, KnowledgeBase, PathCorpus, TreeArrays
from exceptions import ConfigError, EstimationError, InfeasiblePollutionError, InvalidScenarioError, NoPlanError
from routing_sim import RoaTable, RouteChange, observe_origins
from topology.prefixes import allocate_prefixes, parse_prefix

PREFIX = parse_prefix('10.0.0.0/16')


def low_degree_forest() -> Forest:
    """Flags a link when deg_u <= 2.5 and deg_v <= 1.5."""
    tree = TreeArrays(
        feature=np.array([0, 1, -1, -1, -1]),
        threshold=np.array([2.5, 1.5, 0.0, 0.0, 0.0]),
        left=np.array([1, 3, -1, -1, -1]),
        right=np.array([2, 4, -1, -1, -1]),
        counts=np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]),
    )
    return Forest([tree], n_trees=1, max_depth=2, training_seed=0)


@pytest.fixture
def prefixes(small_graph):
    return allocate_prefixes(small_graph.nodes, base='10.0.0.0', length=16)


@pytest.fixture
def detector(small_graph, prefixes):
    """Detector whose history is what AS1 alone sees."""
    events = observe_origins(small_graph, prefixes, monitors=[1])
    return DfohDetector(low_degree_forest(), KnowledgeBase.from_events(events), {},
                        corpus=PathCorpus.from_events(events))


@pytest.fixture
def context(small_graph, prefixes):
    return SimContext(graph=small_graph, monitors=(1,), prefixes=prefixes, roas=RoaTable())


class TestAttackSpec:
    """Test suite for attack inputs."""

    def test_valid(self):
        spec = AttackSpec(6, 7, PREFIX, budget=3)
        assert spec.hijack_link == (6, 7)

    @pytest.mark.parametrize('kwargs', [
        {'attacker': 7, 'victim': 7},
        {'attacker': 6, 'victim': 7, 'budget': -1},
        {'attacker': 6, 'victim': 7, 'allow_transit_augmentation': True, 'wait_days': 10},
        {'attacker': 6, 'victim': 7, 'hijack_delay_days': -1},
        {'attacker': 6, 'victim': 7, 'announcement_lifetime_days': 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidScenarioError):
            AttackSpec(parent_prefix=PREFIX, **kwargs)

    def test_planner_weights(self):
        assert PlannerWeights.from_dict({'ixp': 1}).ixp == 1.0
        with pytest.raises(ConfigError):
            PlannerWeights.from_dict({'size': 1})


class TestPoisonPlanning:
    """Test suite for the greedy poisoning planner."""

    def test_extend_paths(self):
        assert extend_paths([(1, 3, 6), (1, 7, 6)], 7) == [(1, 3, 6, 7)]

    def test_candidates_and_ranking(self, detector):
        candidates = poison_candidates(detector, 6, [(1, 3, 6)])
        assert candidates == [2, 5]
        assert rank_candidates(candidates, 7, detector, detector.kb, PlannerWeights()) == [5, 2]

    def test_plan_reaches_evasion(self, detector, prefixes):
        plan = plan_dfoh_poisoning(detector, AttackSpec(6, 7, prefixes[6], budget=3))
        assert plan.forged_origins == (5, 2)
        assert plan.predicted_evasion
        assert (plan.suspicion_before, plan.predicted_suspicion) == (1.0, 0.0)
        assert [str(p.sub_prefix) for p in plan.poison_links] == ['10.5.0.0/17', '10.5.128.0/17']

    def test_budget_caps_plan(self, detector, prefixes):
        plan = plan_dfoh_poisoning(detector, AttackSpec(6, 7, prefixes[6], budget=1))
        assert plan.forged_origins == (5,)
        assert not plan.predicted_evasion

    def test_zero_budget(self, detector, prefixes):
        with pytest.raises(NoPlanError) as info:
            plan_dfoh_poisoning(detector, AttackSpec(6, 7, prefixes[6], budget=0))
        assert info.value.plan.poison_links == ()
        assert info.value.plan.suspicion_before == 1.0

    def test_already_evading(self, detector, prefixes):
        # deg(5) = 2 in AS1's view
        plan = plan_dfoh_poisoning(detector, AttackSpec(6, 5, prefixes[6], budget=3))
        assert plan.predicted_evasion
        assert plan.poison_links == ()

    def test_no_paths(self, small_graph, prefixes):
        events = observe_origins(small_graph, {7: prefixes[7]}, monitors=[1])
        detector = DfohDetector(low_degree_forest(), KnowledgeBase.from_events(events), {},
                                corpus=PathCorpus.from_events(events))
        with pytest.raises(NoPlanError):
            plan_dfoh_poisoning(detector, AttackSpec(6, 7, prefixes[6]))

    def test_augmentation_target(self, small_graph):
        assert augment_transit(small_graph, 7) == 1
        assert augment_transit(small_graph, 6) == 1


class TestPoisonExecution:
    """Test suite for running a plan against the defender."""

    def test_plan_evades_defender(self, detector, context, prefixes):
        spec = AttackSpec(6, 7, prefixes[6], budget=3)
        plan = plan_dfoh_poisoning(detector, spec)
        result = execute_dfoh_attack(context, detector, plan, spec, day=1)

        assert result.evaded
        assert (result.suspicion_before, result.suspicion_after) == (1.0, 0.0)
        assert result.links_used == 2
        assert result.poison_flagged == 0
        assert result.poison_links == ((6, 5), (6, 2))
        assert result.attacker_share > 0
        assert not detector.kb.is_known((5, 6))

    @pytest.mark.parametrize('lifetime, evaded', [(None, True), (300, True), (10, False)])
    def test_announcement_lifetime(self, detector, context, prefixes, lifetime, evaded):
        plan = plan_dfoh_poisoning(detector, AttackSpec(6, 7, prefixes[6], budget=3))
        spec = AttackSpec(6, 7, prefixes[6], budget=3, hijack_delay_days=400, announcement_lifetime_days=lifetime)
        result = execute_dfoh_attack(context, detector, plan, spec, day=1)
        assert result.evaded is evaded

    def test_empty_plan_is_caught(self, detector, context, prefixes):
        spec = AttackSpec(6, 7, prefixes[6], budget=0)
        result = execute_dfoh_attack(context, detector, PoisonPlan(), spec)
        assert not result.evaded
        assert result.links_used == 0
        assert set(result.to_row()) == {'attacker', 'victim', 'evaded', 'links_used',
                                        'suspicion_before', 'suspicion_after'}


class TestOscillation:
    """Test suite for the multiplier distribution."""

    def test_calibrated_moments(self):
        model = OscillationModel()
        mean, std = model.moments()
        assert mean == pytest.approx(6.43, rel=0.02)
        assert std == pytest.approx(17.79, rel=0.15)

    def test_sample_moments(self):
        model = OscillationModel()
        samples = model.sample(10_000, np.random.default_rng(0))
        assert samples.min() >= 1 and samples.max() <= 500
        assert samples.mean() == pytest.approx(6.43, rel=0.05)
        assert samples.std() == pytest.approx(17.79, rel=0.15)

    def test_degenerate(self):
        samples = OscillationModel(mean=3, std=0).sample(20, np.random.default_rng(1))
        assert np.all(samples == 3)
        assert len(OscillationModel().sample(0, np.random.default_rng(1))) == 0

    @pytest.mark.parametrize('kwargs', [{'shape': 'pareto'}, {'mean': 0.5}, {'std': -1}])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            OscillationModel(**kwargs)


@pytest.fixture
def line_table():
    """AS x-positions; AS2 sits on AS1, forged origins spread to the right."""
    x = {1: 0.0, 2: 0.0, 3: 4.5, 4: 4.52, 5: 2.0, 6: 30.0}
    vectors = np.array([[x[a], 0.0] for a in sorted(x)])
    return EmbeddingTable(sorted(x), vectors, np.zeros(len(x)), lam=1.0)


def warm_changes(start=0):
    return [RouteChange(PREFIX, (1, 2), (1, 5), start)] + [RouteChange(PREFIX, (1, 2), (1, 2), start + t)
                                                           for t in (1, 2, 3)]


class TestThresholdPollution:
    """Test suite for pollution planning and evaluation."""

    def test_band_selection(self, line_table):
        plan = plan_threshold_pollution(line_table, 1.01 * 1.5, 2, PREFIX, (1, 2), n_distinct=2)
        assert [a.forged_origin for a in plan.announcements] == [4, 3]
        assert plan.status == FEASIBLE
        assert plan.announcements[1].expected_score == pytest.approx(1.5)
        assert len({a.prefix for a in plan.announcements}) == 2

    def test_partial(self, line_table):
        plan = plan_threshold_pollution(line_table, 1.01 * 1.5, 2, PREFIX, (1, 2), n_distinct=3)
        assert plan.status == PARTIAL
        assert plan.n_distinct == 2

    def test_infeasible(self, line_table):
        with pytest.raises(InfeasiblePollutionError):
            plan_threshold_pollution(line_table, 0.5, 2, PREFIX, (1, 2), n_distinct=2)

    def test_invalid_inputs(self, line_table):
        with pytest.raises(InvalidScenarioError):
            plan_threshold_pollution(line_table, 0.0, 2, PREFIX, (1, 2), n_distinct=2)
        with pytest.raises(InvalidScenarioError):
            plan_threshold_pollution(line_table, 1.0, 5, PREFIX, (1, 2), n_distinct=2)
        assert plan_threshold_pollution(line_table, 1.0, 2, PREFIX, (1, 2), n_distinct=0).n_distinct == 0

    def test_amplify(self, line_table):
        plan = plan_threshold_pollution(line_table, 1.01 * 1.5, 2, PREFIX, (1, 2), n_distinct=2)
        changes = amplify(plan, OscillationModel(mean=3, std=0), seed=4, start=100, window_seconds=10)
        assert len(changes) == 6
        assert all(100 <= c.time < 110 for c in changes)
        assert {c.new_path for c in changes} == {(1, 2, 3), (1, 2, 4)}
        assert [c.time for c in changes] == sorted(c.time for c in changes)

    def test_estimate_matches_defender(self, line_table):
        defender = BeamDetector(line_table, window_seconds=10)
        theta = defender.warm_up(warm_changes(), end=10)
        assert estimate_beam_threshold(warm_changes(), line_table, window_seconds=10, end=10) == theta

    def test_estimate_needs_a_full_window(self, line_table):
        partial = [RouteChange(PREFIX, (1, 2), (1, 3), 5)]
        with pytest.raises(EstimationError):
            estimate_beam_threshold(partial, line_table)
        with pytest.raises(EstimationError):
            estimate_beam_threshold(warm_changes(), line_table, window_seconds=10, end=9)
        with pytest.raises(EstimationError):
            estimate_beam_threshold([], line_table)
        spanning = partial + [RouteChange(PREFIX, (1, 2), (1, 2), 3600)]
        assert estimate_beam_threshold(spanning, line_table) == pytest.approx(
            window_threshold([path_difference(line_table, partial[0])], 3.0))

    @pytest.mark.parametrize('seed', range(50))
    def test_estimate_missing_one_event(self, line_table, seed):
        rng = np.random.default_rng(seed)
        k = 3.0
        changes = [RouteChange(PREFIX, (1, 2), (1, int(rng.choice([2, 3, 4, 5, 6]))), int(t))
                   for t in rng.integers(0, 10, size=int(rng.integers(2, 12)))]
        dropped = int(rng.integers(len(changes)))
        missing = changes[:dropped] + changes[dropped + 1:]
        defender = BeamDetector(line_table, window_seconds=10, k=k)
        theta = defender.warm_up(changes, end=10)
        estimate = estimate_beam_threshold(missing, line_table, window_seconds=10, k=k, end=10)

        rest = [path_difference(line_table, c) for c in missing]
        s = path_difference(line_table, changes[dropped])
        n, mean, std = len(changes), float(np.mean(rest)), float(np.std(rest))
        leverage = abs(s - mean) / n + k * max(abs(s - mean) * np.sqrt(n - 1) / n, std * (1 - np.sqrt((n - 1) / n)))
        assert estimate == pytest.approx(window_threshold(rest, k))
        assert abs(estimate - theta) <= leverage + 1e-9

    def test_pollution_raises_threshold(self, line_table):
        defender = BeamDetector(line_table, window_seconds=10)
        theta_hat = defender.warm_up(warm_changes(), end=10)
        plan = plan_threshold_pollution(line_table, theta_hat, 2, PREFIX, (1, 2), n_distinct=2)
        baseline = warm_changes(start=10)
        polluted = baseline + amplify(plan, OscillationModel(mean=3, std=0), seed=0, start=10, window_seconds=10)
        candidates = [RouteChange(PREFIX, (1, 2), (1, 3), 10), RouteChange(PREFIX, (1, 2), (1, 6), 10)]

        result = evaluate_pollution(defender, baseline, polluted, candidates)

        assert result.theta_before == pytest.approx(theta_hat)
        assert result.theta_after > result.theta_before
        assert (result.undetected_before, result.undetected_after) == (0.0, 0.5)
        assert result.gain == 0.5
        assert defender.theta == theta_hat

    def test_hijack_candidates(self, small_graph):
        prefixes = allocate_prefixes(small_graph.nodes, base='10.0.0.0', length=16)
        events = observe_origins(small_graph, prefixes, monitors=[1, 7])
        changes = hijack_candidates(events, attackers=[6], victims=[7, 6], time=5)
        assert changes == [RouteChange(prefixes[7], (1, 2, 5, 7), (1, 3, 6, 7), 5)]


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
