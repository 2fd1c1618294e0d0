"""
BGP propagation over AS graphs, hijack simulation and monitor observation.
"""

from routing_sim.dynamics import generate_background_changes
from routing_sim.hijacks import (
    HijackMode,
    RoaMode,
    attacker_share,
    craft_poison_announcement,
    fresh_subprefix,
    simulate_hijack,
)
from routing_sim.observation import (
    observe,
    observe_origins,
    observe_prefix_paths,
    paths_by_origin,
    read_route_dump,
    write_route_dump,
)
from routing_sim.propagation import propagate, propagate_prefix
from routing_sim.routes import (
    Announcement,
    HijackOutcome,
    RibSnapshot,
    RoaTable,
    RouteChange,
    RouteEvent,
    Validation,
    full_path,
)

__all__ = [
    'Announcement',
    'HijackMode',
    'HijackOutcome',
    'RibSnapshot',
    'RoaMode',
    'RoaTable',
    'RouteChange',
    'RouteEvent',
    'Validation',
    'attacker_share',
    'craft_poison_announcement',
    'fresh_subprefix',
    'full_path',
    'generate_background_changes',
    'observe',
    'observe_origins',
    'observe_prefix_paths',
    'paths_by_origin',
    'propagate',
    'propagate_prefix',
    'read_route_dump',
    'simulate_hijack',
    'write_route_dump',
]
