"""
Legitimate route churn: path changes caused by single link failures.
"""

import logging
from typing import Dict, List, Mapping, Sequence

import numpy as np

from routing_sim.propagation import propagate_prefix
from routing_sim.routes import Announcement, RoaTable, RouteChange, full_path
from topology.as_graph import AsGraph, Asn
from topology.prefixes import Prefix

logger = logging.getLogger(__name__)


def generate_background_changes(graph: AsGraph, prefixes: Mapping[Asn, Prefix], monitors: Sequence[Asn], n: int,
                                start: int, window: int, seed: int, max_attempts: int = 20) -> List[RouteChange]:
    """
    Route changes seen by monitors when one link of their path fails.

    Args:
        graph (AsGraph): Topology
        prefixes (dict): Origin AS -> prefix
        monitors (list): Monitor ASes
        n (int): Number of changes wanted
        start (int): Window start (seconds)
        window (int): Window length (seconds); times are uniform in it
        seed (int): Random seed
        max_attempts (int): Tries per wanted change before giving up

    Returns:
        list: Up to n RouteChange objects sorted by time
    """
    rng = np.random.default_rng(seed)
    origins = sorted(prefixes)
    monitors = sorted(monitors)
    if not origins or not monitors or n <= 0:
        return []

    empty = RoaTable()
    baseline: Dict[Asn, Dict[Asn, Announcement]] = {}
    changes: List[RouteChange] = []
    for _ in range(n * max_attempts):
        if len(changes) >= n:
            break
        origin = origins[int(rng.integers(len(origins)))]
        monitor = monitors[int(rng.integers(len(monitors)))]
        prefix = prefixes[origin]
        if origin not in baseline:
            baseline[origin] = propagate_prefix(graph, prefix, [Announcement(prefix, (origin,), origin)],
                                                empty, frozenset())
        route = baseline[origin].get(monitor)
        if route is None:
            continue
        old = full_path(monitor, route)
        if len(old) < 2:
            continue
        hop = int(rng.integers(len(old) - 1))
        failed = graph.without_edge(old[hop], old[hop + 1])
        rerouted = propagate_prefix(failed, prefix, [Announcement(prefix, (origin,), origin)], empty, frozenset())
        if monitor not in rerouted:
            continue
        new = full_path(monitor, rerouted[monitor])
        if new == old:
            continue
        time = start + int(rng.integers(window))
        changes.append(RouteChange(prefix=prefix, old_path=old, new_path=new, time=time))

    if len(changes) < n:
        logger.warning("generated %d of %d background changes", len(changes), n)
    return sorted(changes, key=lambda c: (c.time, c.prefix, c.old_path, c.new_path))
