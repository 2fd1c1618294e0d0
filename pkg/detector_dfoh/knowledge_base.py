"""
Historical AS-link knowledge base with retention window and quarantine.
"""

import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx

from exceptions import InvalidScenarioError, ParseError
from routing_sim.routes import RouteEvent
from topology.as_graph import Asn, Link, canonical_link

logger = logging.getLogger(__name__)


@dataclass
class LinkRecord:
    first_seen: int
    last_seen: int
    directions: Set[Tuple[Asn, Asn]] = field(default_factory=set)

    def copy(self) -> "LinkRecord":
        return LinkRecord(self.first_seen, self.last_seen, set(self.directions))


def path_links(path) -> List[Tuple[Asn, Asn]]:
    """Consecutive ordered pairs of a path."""
    return list(zip(path, path[1:]))


class KnowledgeBase:
    """
    Links seen by the public monitors, keyed by unordered pair.

    Quarantined links stay recorded but are treated as unknown (and left
    out of the graph) until their release day.
    """

    def __init__(self, window_days: int = 300, day: int = 0):
        self.window_days = window_days
        self.day = day
        self.links: Dict[Link, LinkRecord] = {}
        self.quarantine: Dict[Link, int] = {}
        self._graph: Optional[nx.Graph] = None
        self.memo: Dict = {}

    def __len__(self) -> int:
        return len(self.links)

    def __repr__(self):
        return f"KnowledgeBase(day={self.day}, links={len(self.links)}, quarantined={len(self.quarantine)})"

    def _touch(self) -> None:
        self._graph = None
        self.memo = {}

    def copy(self) -> "KnowledgeBase":
        clone = KnowledgeBase(self.window_days, self.day)
        clone.links = {link: record.copy() for link, record in self.links.items()}
        clone.quarantine = dict(self.quarantine)
        return clone

    def is_known(self, link: Link) -> bool:
        """Recorded and not in quarantine."""
        key = canonical_link(*link)
        return key in self.links and key not in self.quarantine

    def active_links(self) -> List[Link]:
        return sorted(link for link in self.links if link not in self.quarantine)

    def graph(self) -> nx.Graph:
        """Graph of the active links; cached until the next mutation."""
        if self._graph is None:
            g = nx.Graph()
            g.add_edges_from(self.active_links())
            self._graph = g
        return self._graph

    def record(self, path, day: int) -> None:
        """Refresh last_seen and directions of already-recorded links of a path."""
        for a, b in path_links(path):
            rec = self.links.get(canonical_link(a, b))
            if rec is not None:
                rec.last_seen = max(rec.last_seen, day)
                rec.directions.add((a, b))

    def refresh(self, links: Iterable[Link], day: int) -> None:
        """Mark recorded links as still observed on a day, directions unchanged."""
        for link in links:
            rec = self.links.get(canonical_link(*link))
            if rec is not None:
                rec.last_seen = max(rec.last_seen, day)

    def insert(self, link: Link, day: int, directions: Iterable[Tuple[Asn, Asn]] = (),
               quarantine_until: Optional[int] = None) -> None:
        key = canonical_link(*link)
        rec = self.links.get(key)
        if rec is None:
            self.links[key] = LinkRecord(day, day, set(directions))
        else:
            rec.last_seen = max(rec.last_seen, day)
            rec.directions.update(directions)
        if quarantine_until is not None:
            self.quarantine[key] = quarantine_until
        self._touch()

    def advance(self, day: int) -> None:
        """Release due quarantines and evict links older than the window."""
        if day < self.day:
            raise InvalidScenarioError(f"knowledge base is at day {self.day}, cannot go back to {day}")
        self.day = day
        released = [link for link, release in self.quarantine.items() if release <= day]
        for link in released:
            del self.quarantine[link]
        expired = [link for link, rec in self.links.items() if rec.last_seen < day - self.window_days]
        for link in expired:
            del self.links[link]
            self.quarantine.pop(link, None)
        if released or expired:
            logger.debug("day %d: released %d quarantined links, evicted %d", day, len(released), len(expired))
        self._touch()

    @classmethod
    def from_events(cls, events: Iterable[RouteEvent], day: int = 0, window_days: int = 300) -> "KnowledgeBase":
        """Historical knowledge base accepting every observed link."""
        return update_knowledge_base(cls(window_days, day), events, day)

    def to_snapshot(self) -> str:
        """Lines asn,asn,first_seen,last_seen,dir_flags,quarantine_release."""
        lines = [f"# window_days={self.window_days} day={self.day}"]
        for (a, b), rec in sorted(self.links.items()):
            flags = (1 if (a, b) in rec.directions else 0) | (2 if (b, a) in rec.directions else 0)
            release = self.quarantine.get((a, b))
            lines.append(f"{a},{b},{rec.first_seen},{rec.last_seen},{flags},{'' if release is None else release}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_snapshot(cls, text: str) -> "KnowledgeBase":
        kb = cls()
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith('#'):
                for token in line[1:].split():
                    key, _, value = token.partition('=')
                    if key in ('window_days', 'day'):
                        setattr(kb, key, int(value))
                continue
            fields = line.split(',')
            if len(fields) != 6:
                raise ParseError(f"expected 6 fields, got {len(fields)}", line_number)
            try:
                a, b, first, last, flags = (int(f) for f in fields[:5])
                release = int(fields[5]) if fields[5] else None
            except ValueError as e:
                raise ParseError(str(e), line_number) from e
            key = canonical_link(a, b)
            directions = set()
            if flags & 1:
                directions.add(key)
            if flags & 2:
                directions.add((key[1], key[0]))
            kb.links[key] = LinkRecord(first, last, directions)
            if release is not None:
                kb.quarantine[key] = release
        return kb


def detect_new_links(kb: KnowledgeBase, event: RouteEvent, day: int) -> List[Link]:
    """
    Links of an event path missing from the knowledge base.

    Quarantined links count as missing. Returned in path order as
    unordered (low, high) pairs, without duplicates.
    """
    found: List[Link] = []
    for a, b in path_links(event.path):
        key = canonical_link(a, b)
        if not kb.is_known(key) and key not in found:
            found.append(key)
    return found


def update_knowledge_base(kb: KnowledgeBase, events: Iterable[RouteEvent], day: int,
                          verdicts: Optional[Mapping[Link, object]] = None,
                          provider_links: AbstractSet[Link] = frozenset(),
                          quarantine_days: int = 30) -> KnowledgeBase:
    """
    Fold a batch of observations into a copy of the knowledge base.

    Args:
        kb (KnowledgeBase): Current state (not modified)
        events (iterable): Observed routes
        day (int): Current day, not earlier than kb.day
        verdicts (dict, optional): link -> Verdict for new links; flagged
            links are not inserted. Without verdicts every link is accepted.
        provider_links (set): New links declared as fresh provider
            connections; they enter quarantine until day + quarantine_days
        quarantine_days (int): Quarantine length

    Returns:
        KnowledgeBase: Updated copy
    """
    updated = kb.copy()
    updated.advance(day)
    declared = {canonical_link(*link) for link in provider_links}
    for event in events:
        path = event.path
        for a, b in path_links(path):
            key = canonical_link(a, b)
            if key in updated.links:
                continue
            verdict = verdicts.get(key) if verdicts is not None else None
            if verdict is not None and getattr(verdict, 'flagged', False):
                continue
            release = day + quarantine_days if key in declared else None
            updated.insert(key, day, quarantine_until=release)
        updated.record(path, day)
    updated._touch()
    return updated
