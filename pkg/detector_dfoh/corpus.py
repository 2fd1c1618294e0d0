"""
Public monitor path corpus, indexed by link and by origin.
"""

import logging
from typing import Dict, Iterable, List, Tuple

from detector_dfoh.knowledge_base import path_links
from routing_sim.routes import RouteEvent
from topology.as_graph import Asn, Link, canonical_link

logger = logging.getLogger(__name__)

Path = Tuple[Asn, ...]


class PathCorpus:
    """
    Collector paths seen so far.

    Each index keeps at most max_paths paths per key, first come first kept.
    """

    def __init__(self, max_paths: int = 10):
        self.max_paths = max_paths
        self._by_link: Dict[Link, List[Path]] = {}
        self._by_origin: Dict[Asn, List[Path]] = {}

    def __len__(self) -> int:
        return sum(len(paths) for paths in self._by_origin.values())

    def copy(self) -> "PathCorpus":
        clone = PathCorpus(self.max_paths)
        clone._by_link = {key: list(paths) for key, paths in self._by_link.items()}
        clone._by_origin = {key: list(paths) for key, paths in self._by_origin.items()}
        return clone

    @staticmethod
    def _keep(index: Dict, key, path: Path, limit: int) -> None:
        paths = index.setdefault(key, [])
        if path not in paths and len(paths) < limit:
            paths.append(path)

    def add_path(self, path: Path) -> None:
        path = tuple(path)
        self._keep(self._by_origin, path[-1], path, self.max_paths)
        for a, b in path_links(path):
            self._keep(self._by_link, canonical_link(a, b), path, self.max_paths)

    def add(self, events: Iterable[RouteEvent]) -> None:
        for event in events:
            self.add_path(event.path)

    @classmethod
    def from_events(cls, events: Iterable[RouteEvent], max_paths: int = 10) -> "PathCorpus":
        corpus = cls(max_paths)
        corpus.add(events)
        return corpus

    def paths_with(self, link: Link) -> List[Path]:
        return list(self._by_link.get(canonical_link(*link), ()))

    def paths_to(self, origin: Asn) -> List[Path]:
        return list(self._by_origin.get(origin, ()))

    def origins(self) -> List[Asn]:
        return sorted(self._by_origin)
