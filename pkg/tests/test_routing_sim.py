"""
Unit tests for route propagation, hijacks, poisoning announcements and monitor dumps.
"""

import numpy as np
import pytest

from exceptions import (
    InvalidChangeError,
    InvalidPathError,
    InvalidScenarioError,
    NoSubprefixError,
    ParseError,
    UnknownOriginError,
)
from routing_sim import (
    Announcement,
    HijackMode,
    HijackOutcome,
    RoaMode,
    RoaTable,
    RouteChange,
    Validation,
    craft_poison_announcement,
    fresh_subprefix,
    full_path,
    generate_background_changes,
    observe,
    observe_origins,
    paths_by_origin,
    propagate,
    read_route_dump,
    simulate_hijack,
    write_route_dump,
)
from topology.as_graph import Relationship, is_valley_free
from topology.prefixes import allocate_prefixes, parse_prefix

PREFIX = parse_prefix('10.0.0.0/16')
CLASS_RANK = {
    Relationship.PROVIDER_TO_CUSTOMER: 1,  # neighbour is our customer
    Relationship.PEER_TO_PEER: 2,
    Relationship.CUSTOMER_TO_PROVIDER: 3,
}


def naive_routes(graph, announcements):
    """Repeat best-route selection at every AS until nothing changes."""
    best, learned = {}, {}
    for ann in announcements:
        best[ann.as_path[0]] = Announcement(ann.prefix, ann.as_path, ann.as_path[0])
        learned[ann.as_path[0]] = 0
    injectors = set(best)

    for _ in range(200):
        changed = False
        for asn in sorted(graph.nodes - injectors):
            candidates = []
            for neighbour in sorted(graph.neighbors(asn)):
                if neighbour not in best:
                    continue
                exports = (graph.relationship(neighbour, asn) is Relationship.PROVIDER_TO_CUSTOMER
                           or learned[neighbour] <= 1)
                path = full_path(neighbour, best[neighbour])
                if not exports or asn in path:
                    continue
                rank = CLASS_RANK[graph.relationship(asn, neighbour)]
                candidates.append((rank, len(path), neighbour, path))
            current = best.get(asn)
            if candidates:
                rank, _, sender, path = min(candidates)
                chosen = Announcement(announcements[0].prefix, path, sender)
                if chosen != current:
                    best[asn], learned[asn] = chosen, rank
                    changed = True
            elif current is not None:
                del best[asn], learned[asn]
                changed = True
        if not changed:
            return best
    raise AssertionError("route selection did not settle")


class TestPropagation:
    """Test suite for three-pass propagation."""

    @pytest.mark.parametrize('trial', range(100))
    def test_matches_iterated_selection(self, trial, random_graph):
        rng = np.random.default_rng(trial)
        graph = random_graph(rng, int(rng.integers(2, 9)))
        origin = int(rng.choice(sorted(graph.nodes)))
        announcement = Announcement(PREFIX, (origin,), origin)

        rib = propagate(graph, [announcement])
        expected = naive_routes(graph, [announcement])

        assert {asn: ann for (asn, _), ann in rib.best.items()} == expected

    @pytest.mark.parametrize('trial', range(40))
    def test_matches_iterated_selection_with_two_origins(self, trial, random_graph):
        rng = np.random.default_rng(1000 + trial)
        graph = random_graph(rng, int(rng.integers(3, 9)))
        victim, attacker = (int(a) for a in rng.choice(sorted(graph.nodes), size=2, replace=False))
        announcements = [Announcement(PREFIX, (victim,), victim), Announcement(PREFIX, (attacker,), attacker)]

        rib = propagate(graph, announcements)

        assert {asn: ann for (asn, _), ann in rib.best.items()} == naive_routes(graph, announcements)

    @pytest.mark.parametrize('trial', range(20))
    def test_selected_paths_are_valley_free_and_loop_free(self, trial, random_graph):
        rng = np.random.default_rng(2000 + trial)
        graph = random_graph(rng, 8)
        prefixes = allocate_prefixes(graph.nodes, base='10.0.0.0', length=16)
        rib = propagate(graph, [Announcement(p, (asn,), asn) for asn, p in prefixes.items()])

        for (asn, _), ann in rib.best.items():
            path = full_path(asn, ann)
            assert len(set(path)) == len(path)
            assert is_valley_free(graph, path)

    def test_peer_route_not_exported_upwards(self, small_graph):
        rib = propagate(small_graph, [Announcement(PREFIX, (3,), 3)])

        assert rib.route(1, PREFIX).as_path == (3,)
        assert rib.route(2, PREFIX).as_path == (1, 3)
        assert rib.route(7, PREFIX).as_path == (5, 2, 1, 3)
        assert rib.route(6, PREFIX).sender == 3

    def test_customer_route_preferred_over_shorter_peer_route(self, small_graph):
        rib = propagate(small_graph, [Announcement(PREFIX, (7,), 7)])

        assert rib.route(1, PREFIX).as_path == (2, 5, 7)
        assert rib.route(6, PREFIX).as_path == (3, 1, 2, 5, 7)

    def test_unknown_origin(self, small_graph):
        with pytest.raises(UnknownOriginError):
            propagate(small_graph, [Announcement(PREFIX, (3, 99), 3)])

    def test_rov_drops_invalid_only(self, small_graph):
        roas = RoaTable({PREFIX: {7}})
        rib = propagate(small_graph, [Announcement(PREFIX, (6,), 6)], roas, rov_ases={3})

        assert rib.route(3, PREFIX) is None
        assert rib.route(1, PREFIX).as_path == (4, 6)


class TestRouteTypes:
    """Test suite for announcements, ROAs and route changes."""

    def test_loops_rejected(self):
        with pytest.raises(InvalidPathError):
            Announcement(PREFIX, (1, 2, 1), 1)
        with pytest.raises(InvalidChangeError):
            RouteChange(PREFIX, (1, 2), (1, 3, 1), 0)
        with pytest.raises(InvalidChangeError):
            RouteChange(PREFIX, (), (1,), 0)

    def test_roa_validation(self):
        roas = RoaTable({PREFIX: {7}})
        assert roas.validate(PREFIX, 7) is Validation.VALID
        assert roas.validate(PREFIX, 6) is Validation.INVALID
        assert roas.validate(parse_prefix('10.0.0.0/17'), 7) is Validation.INVALID
        assert roas.validate(parse_prefix('11.0.0.0/16'), 7) is Validation.NOT_FOUND

    def test_roa_merge(self):
        merged = RoaTable({PREFIX: {7}}).merged(RoaTable({PREFIX: {8}}))
        assert merged.entries[PREFIX] == {7, 8}
        assert len(merged) == 1

    def test_outcome_share_range(self):
        with pytest.raises(ValueError):
            HijackOutcome(attacker_share=1.5)


class TestHijacks:
    """Test suite for hijack simulation."""

    def test_type0_share(self, small_graph):
        outcome = simulate_hijack(small_graph, RoaTable(), frozenset(), victim=7, attacker=6,
                                  mode=HijackMode.TYPE0, prefix=PREFIX, monitors=(1, 2))
        assert outcome.attacker_share == pytest.approx(3 / 5)
        assert outcome.monitor_paths == ((1, 3, 6),)

    def test_subprefix_hijack_captures_everyone(self, small_graph):
        outcome = simulate_hijack(small_graph, RoaTable(), frozenset(), victim=7, attacker=6,
                                  mode=HijackMode.TYPE0, prefix=PREFIX, sub_prefix=True)
        assert outcome.attacker_share == 1.0

    def test_full_rov_stops_type0(self, small_graph):
        outcome = simulate_hijack(small_graph, RoaTable({PREFIX: {7}}), small_graph.nodes, victim=7, attacker=6,
                                  mode=HijackMode.TYPE0, prefix=PREFIX)
        assert outcome.attacker_share == 0.0

    def test_type1_passes_rov(self, small_graph):
        outcome = simulate_hijack(small_graph, RoaTable({PREFIX: {7}}), small_graph.nodes, victim=7, attacker=6,
                                  mode=HijackMode.TYPE1, prefix=PREFIX)
        assert outcome.attacker_share == pytest.approx(3 / 5)

    def test_attacker_must_differ_from_victim(self, small_graph):
        with pytest.raises(InvalidScenarioError):
            simulate_hijack(small_graph, RoaTable(), frozenset(), victim=7, attacker=7,
                            mode=HijackMode.TYPE0, prefix=PREFIX)


class TestPoisonAnnouncements:
    """Test suite for forged-origin sub-prefix announcements."""

    def test_without_roa(self):
        announcement, delta = craft_poison_announcement(10, 20, PREFIX)
        assert str(announcement.prefix) == '10.0.0.0/17'
        assert announcement.as_path == (10, 20)
        assert announcement.sender == 10
        assert len(delta) == 0

    def test_with_roa(self):
        announcement, delta = craft_poison_announcement(10, 20, PREFIX, RoaMode.CREATE_ROA)
        assert delta.validate(announcement.prefix, 20) is Validation.VALID

    def test_used_subprefixes_skipped(self):
        used = [parse_prefix('10.0.0.0/17')]
        assert str(fresh_subprefix(PREFIX, used)) == '10.0.128.0/17'
        used.append(parse_prefix('10.0.128.0/17'))
        assert str(fresh_subprefix(PREFIX, used)) == '10.0.0.0/18'

    def test_host_route_has_no_subprefix(self):
        with pytest.raises(NoSubprefixError):
            fresh_subprefix(parse_prefix('10.0.0.1/32'))

    def test_forged_origin_must_differ(self):
        with pytest.raises(InvalidScenarioError):
            craft_poison_announcement(10, 10, PREFIX)


class TestObservation:
    """Test suite for monitor views and the route dump format."""

    @pytest.fixture
    def events(self, small_graph):
        prefixes = allocate_prefixes(small_graph.nodes, base='10.0.0.0', length=16)
        return observe_origins(small_graph, prefixes, monitors=[7, 1])

    def test_events_ordered_by_monitor_then_prefix(self, events):
        keys = [(e.monitor, e.prefix) for e in events]
        assert keys == sorted(keys)
        assert {e.monitor for e in events} == {1, 7}
        assert len(events) == 14

    def test_collector_paths_start_at_monitor(self, events):
        assert all(e.path[0] == e.monitor for e in events)
        by_origin = paths_by_origin(events)
        assert by_origin[6] == [(1, 3, 6), (7, 5, 2, 1, 3, 6)]

    def test_dump_reads_back(self, events):
        assert read_route_dump(write_route_dump(events)) == events

    def test_dump_comments_and_errors(self):
        assert read_route_dump("# header\n\n") == []
        with pytest.raises(ParseError) as info:
            read_route_dump("0|1|10.0.0.0/16|1\n0|1|10.0.0.0/16\n")
        assert info.value.line_number == 2

    def test_observe_ignores_duplicate_monitors(self, small_graph):
        rib = propagate(small_graph, [Announcement(PREFIX, (7,), 7)])
        assert observe(rib, [2, 2], time=5) == observe(rib, [2], time=5)


class TestBackgroundChanges:
    """Test suite for link-failure churn."""

    def test_changes_within_window(self, small_graph):
        prefixes = allocate_prefixes(small_graph.nodes, base='10.0.0.0', length=16)
        changes = generate_background_changes(small_graph, prefixes, [6, 7], n=5, start=100, window=50, seed=1)

        assert len(changes) == 5
        assert [c.time for c in changes] == sorted(c.time for c in changes)
        for change in changes:
            assert 100 <= change.time < 150
            assert change.old_path != change.new_path
            assert change.old_path[-1] == change.new_path[-1]
            assert change.old_path[0] == change.new_path[0]

    def test_deterministic(self, small_graph):
        prefixes = allocate_prefixes(small_graph.nodes, base='10.0.0.0', length=16)
        first = generate_background_changes(small_graph, prefixes, [6], n=3, start=0, window=10, seed=4)
        assert first == generate_background_changes(small_graph, prefixes, [6], n=3, start=0, window=10, seed=4)

    def test_nothing_requested(self, small_graph):
        assert generate_background_changes(small_graph, {}, [6], n=3, start=0, window=10, seed=4) == []


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
