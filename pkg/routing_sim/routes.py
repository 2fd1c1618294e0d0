"""
Route data types: announcements, ROAs, RIB snapshots and monitor events.
"""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from exceptions import InvalidChangeError, InvalidPathError
from topology.as_graph import Asn
from topology.prefixes import Prefix, longest_match


def _check_loop_free(path: Tuple[Asn, ...], what: str, error=InvalidChangeError) -> None:
    if not path:
        raise error(f"{what} is empty")
    if len(set(path)) != len(path):
        raise error(f"{what} has a loop: {list(path)}")


@dataclass(frozen=True)
class Announcement:
    """
    A BGP route for a prefix.

    as_path is ordered origin-last; for a route held by an AS it is the
    path as received from `sender` (the injecting AS holds its own path).
    """

    prefix: Prefix
    as_path: Tuple[Asn, ...]
    sender: Asn

    def __post_init__(self):
        object.__setattr__(self, 'as_path', tuple(self.as_path))
        _check_loop_free(self.as_path, "AS path", InvalidPathError)

    @property
    def origin(self) -> Asn:
        return self.as_path[-1]


class Validation(Enum):
    VALID = "valid"
    INVALID = "invalid"
    NOT_FOUND = "notfound"


@dataclass(frozen=True)
class RoaTable:
    """
    Route origin authorisations with exact-length (maxLength = length) entries.
    """

    entries: Mapping[Prefix, FrozenSet[Asn]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'entries',
                           MappingProxyType({p: frozenset(o) for p, o in dict(self.entries).items()}))

    def validate(self, prefix: Prefix, origin: Asn) -> Validation:
        """RFC 6811 origin validation of (prefix, origin)."""
        covering = [p for p in self.entries if prefix.subnet_of(p)]
        if not covering:
            return Validation.NOT_FOUND
        for p in covering:
            if p.prefixlen == prefix.prefixlen and origin in self.entries[p]:
                return Validation.VALID
        return Validation.INVALID

    def merged(self, delta: "RoaTable") -> "RoaTable":
        combined: Dict[Prefix, FrozenSet[Asn]] = dict(self.entries)
        for prefix, origins in delta.entries.items():
            combined[prefix] = combined.get(prefix, frozenset()) | origins
        return RoaTable(combined)

    def __len__(self) -> int:
        return len(self.entries)


class RibSnapshot:
    """Selected route per (AS, prefix); immutable once built."""

    def __init__(self, best: Mapping[Tuple[Asn, Prefix], Announcement]):
        self._best = MappingProxyType(dict(best))
        self._by_asn: Dict[Asn, Dict[Prefix, Announcement]] = {}
        for (owner, prefix), ann in self._best.items():
            self._by_asn.setdefault(owner, {})[prefix] = ann

    @property
    def best(self) -> Mapping[Tuple[Asn, Prefix], Announcement]:
        return self._best

    def __len__(self) -> int:
        return len(self._best)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RibSnapshot):
            return NotImplemented
        return dict(self._best) == dict(other._best)

    def __repr__(self):
        return f"RibSnapshot(entries={len(self._best)})"

    def route(self, asn: Asn, prefix: Prefix) -> Optional[Announcement]:
        return self._best.get((asn, prefix))

    def prefixes(self) -> List[Prefix]:
        return sorted({prefix for _, prefix in self._best})

    def routes_of(self, asn: Asn) -> Dict[Prefix, Announcement]:
        return dict(self._by_asn.get(asn, {}))

    def forwarding_route(self, asn: Asn, target: Prefix) -> Optional[Announcement]:
        """Longest-prefix match over asn's routes covering target."""
        routes = self._by_asn.get(asn, {})
        best = longest_match(list(routes), target)
        return None if best is None else routes[best]


def full_path(asn: Asn, announcement: Announcement) -> Tuple[Asn, ...]:
    """Path an AS would export (or a collector would record from it)."""
    if announcement.as_path[0] == asn:
        return announcement.as_path
    return (asn,) + announcement.as_path


@dataclass(frozen=True)
class RouteEvent:
    """A route observed at a monitor."""

    time: int
    monitor: Asn
    announcement: Announcement

    @property
    def path(self) -> Tuple[Asn, ...]:
        """Collector-side path, starting at the monitor."""
        return full_path(self.monitor, self.announcement)

    @property
    def prefix(self) -> Prefix:
        return self.announcement.prefix


@dataclass(frozen=True)
class RouteChange:
    """A prefix's path at a monitor replaced by a new one."""

    prefix: Prefix
    old_path: Tuple[Asn, ...]
    new_path: Tuple[Asn, ...]
    time: int

    def __post_init__(self):
        object.__setattr__(self, 'old_path', tuple(self.old_path))
        object.__setattr__(self, 'new_path', tuple(self.new_path))
        _check_loop_free(self.old_path, "old path")
        _check_loop_free(self.new_path, "new path")


@dataclass(frozen=True)
class HijackOutcome:
    """Routing reach of a hijack."""

    attacker_share: float
    monitor_paths: Tuple[Tuple[Asn, ...], ...] = ()
    rib: Optional[RibSnapshot] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.attacker_share <= 1.0:
            raise ValueError(f"attacker_share out of range: {self.attacker_share}")


def group_by_prefix(announcements: Iterable[Announcement]) -> Dict[Prefix, List[Announcement]]:
    grouped: Dict[Prefix, List[Announcement]] = {}
    for ann in announcements:
        grouped.setdefault(ann.prefix, []).append(ann)
    return grouped
