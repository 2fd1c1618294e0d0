"""
Monitor observation model and the line-oriented route dump format.

Dump lines are time|monitor_asn|prefix|asn asn asn, with the path as held
by the monitor (origin last).
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from exceptions import ParseError
from routing_sim.propagation import propagate
from routing_sim.routes import Announcement, RibSnapshot, RoaTable, RouteEvent
from topology.as_graph import AsGraph, Asn
from topology.prefixes import Prefix, parse_prefix

logger = logging.getLogger(__name__)


def observe(rib: RibSnapshot, monitors: Iterable[Asn], time: int) -> List[RouteEvent]:
    """
    Routes held by each monitor.

    Args:
        rib (RibSnapshot): Propagation result
        monitors (iterable): Monitor ASes
        time (int): Timestamp given to every event

    Returns:
        list: One RouteEvent per (monitor, prefix), ordered by (monitor, prefix)
    """
    events = []
    for monitor in sorted(set(monitors)):
        routes = rib.routes_of(monitor)
        for prefix in sorted(routes):
            events.append(RouteEvent(time=time, monitor=monitor, announcement=routes[prefix]))
    return events


def observe_origins(graph: AsGraph, prefixes: Mapping[Asn, Prefix], monitors: Iterable[Asn], time: int = 0,
                    roas: Optional[RoaTable] = None, rov_ases=frozenset()) -> List[RouteEvent]:
    """Monitor view of every AS originating its own prefix."""
    announcements = [Announcement(prefix, (asn,), asn) for asn, prefix in sorted(prefixes.items())]
    rib = propagate(graph, announcements, roas, rov_ases)
    return observe(rib, monitors, time)


def observe_prefix_paths(graph: AsGraph, announcements_by_prefix: Mapping[Prefix, Sequence[Announcement]],
                         monitors: Iterable[Asn], time: int = 0, roas: Optional[RoaTable] = None,
                         rov_ases=frozenset()) -> List[RouteEvent]:
    """Monitor view after propagating several prefixes, each with its own announcements."""
    announcements = [ann for prefix in sorted(announcements_by_prefix) for ann in announcements_by_prefix[prefix]]
    return observe(propagate(graph, announcements, roas, rov_ases), monitors, time)


def paths_by_origin(events: Iterable[RouteEvent]) -> Dict[Asn, List[tuple]]:
    """Collector paths grouped by origin AS, sorted for determinism."""
    grouped: Dict[Asn, List[tuple]] = {}
    for event in events:
        grouped.setdefault(event.announcement.origin, []).append(event.path)
    return {origin: sorted(paths) for origin, paths in grouped.items()}


def write_route_dump(events: Iterable[RouteEvent]) -> str:
    lines = [
        f"{event.time}|{event.monitor}|{event.prefix}|{' '.join(str(a) for a in event.announcement.as_path)}"
        for event in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def read_route_dump(text: Union[str, Sequence[str]]) -> List[RouteEvent]:
    """
    Parse a route dump back into events.

    Raises:
        ParseError: If a line does not have four well-formed fields
    """
    lines = text.splitlines() if isinstance(text, str) else text
    events = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split('|')
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", line_number)
        try:
            time = int(fields[0])
            monitor = int(fields[1])
            path = tuple(int(a) for a in fields[3].split())
        except ValueError as e:
            raise ParseError(str(e), line_number) from e
        if not path:
            raise ParseError("empty AS path", line_number)
        prefix = parse_prefix(fields[2])
        events.append(RouteEvent(time=time, monitor=monitor, announcement=Announcement(prefix, path, path[0])))
    return events
