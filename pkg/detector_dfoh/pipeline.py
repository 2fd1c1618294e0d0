"""
Link verdicts and the detect -> classify -> update detector cycle.
"""

import logging
from dataclasses import dataclass
from typing import AbstractSet, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from detector_dfoh.corpus import PathCorpus
from detector_dfoh.features import compute_features, orient_link, with_path_features
from detector_dfoh.forest import Forest
from detector_dfoh.knowledge_base import KnowledgeBase, detect_new_links, update_knowledge_base
from exceptions import InsufficientDataError
from routing_sim.routes import RouteEvent
from topology.as_graph import AsGraph, Asn, Link, canonical_link
from topology.metadata import Metadata

logger = logging.getLogger(__name__)

FLAG_THRESHOLD = 0.5


@dataclass(frozen=True)
class Verdict:
    suspicion: float
    flagged: bool
    per_path: Tuple[Tuple[Tuple[Asn, ...], float], ...] = ()


def aggregate(suspicions: Sequence[float], threshold: float = FLAG_THRESHOLD) -> Tuple[float, bool]:
    """Median of per-path suspicions and whether it exceeds threshold."""
    median = float(np.median(suspicions))
    return median, median > threshold


def classify_link(forest: Forest, kb: KnowledgeBase, metadata: Metadata, link: Link,
                  observed_paths: Sequence[Sequence[Asn]], relationships: Optional[AsGraph] = None,
                  irr_links: AbstractSet[Link] = frozenset(), threshold: float = FLAG_THRESHOLD) -> Verdict:
    """
    Classify a link from every monitor path carrying it.

    Each path is scored with its own aspath features; the verdict is the
    median of the per-path vote fractions.

    Raises:
        InsufficientDataError: Propagated from compute_features
    """
    paths = [tuple(p) for p in observed_paths]
    link = orient_link(link, paths)
    base = compute_features(kb, metadata, link, paths, relationships, irr_links)
    if not paths:
        suspicion = float(forest.predict_proba(base.to_array())[0])
        return Verdict(suspicion, suspicion > threshold, ())
    rows = np.vstack([with_path_features(base, kb, link, p, relationships).to_array() for p in paths])
    probs = forest.predict_proba(rows)
    suspicion, flagged = aggregate(probs, threshold)
    return Verdict(suspicion, flagged, tuple(zip(paths, (float(p) for p in probs))))


class DfohDetector:
    """
    Forged-origin link detector state.

    Args:
        forest (Forest): Trained classifier
        kb (KnowledgeBase): Historical links
        metadata (dict): Asn -> AsMetadata
        relationships (AsGraph, optional): Public relationship dataset
        irr_links (set): Canonical links registered in the IRR
        corpus (PathCorpus, optional): Monitor paths seen so far
        threshold (float): Flagging threshold on the median suspicion
        quarantine_days (int): Quarantine given to declared provider links
    """

    def __init__(self, forest: Forest, kb: KnowledgeBase, metadata: Metadata,
                 relationships: Optional[AsGraph] = None, irr_links: AbstractSet[Link] = frozenset(),
                 corpus: Optional[PathCorpus] = None, threshold: float = FLAG_THRESHOLD, quarantine_days: int = 30):
        self.forest = forest
        self.kb = kb
        self.metadata = metadata
        self.relationships = relationships
        self.irr_links = frozenset(irr_links)
        self.corpus = corpus if corpus is not None else PathCorpus()
        self.threshold = threshold
        self.quarantine_days = quarantine_days

    def copy(self) -> "DfohDetector":
        """Independent knowledge base and corpus; forest and datasets shared."""
        return DfohDetector(self.forest, self.kb.copy(), self.metadata, self.relationships, self.irr_links,
                            self.corpus.copy(), self.threshold, self.quarantine_days)

    def verdict(self, link: Link, paths: Sequence[Sequence[Asn]]) -> Verdict:
        """Verdict for a link; missing data counts as maximal suspicion."""
        try:
            return classify_link(self.forest, self.kb, self.metadata, link, paths, self.relationships,
                                 self.irr_links, self.threshold)
        except InsufficientDataError as e:
            logger.debug("link %s: %s", link, e)
            return Verdict(1.0, True, tuple((tuple(p), 1.0) for p in paths))

    def process(self, events: Iterable[RouteEvent], day: int,
                provider_links: AbstractSet[Link] = frozenset()) -> Dict[Link, Verdict]:
        """
        Run one observation batch through the detector.

        New links are classified from all paths of the batch carrying them,
        then the knowledge base is updated: flagged links stay out, declared
        provider links are inserted under quarantine. Links already in
        quarantine are not classified again.

        Returns:
            dict: canonical link -> Verdict for the links classified
        """
        events = list(events)
        declared = {canonical_link(*link) for link in provider_links}
        pending: Dict[Link, List[Tuple[Asn, ...]]] = {}
        for event in events:
            for link in detect_new_links(self.kb, event, day):
                if link in declared or link in self.kb.quarantine:
                    continue
                paths = pending.setdefault(link, [])
                if event.path not in paths:
                    paths.append(event.path)

        verdicts = {link: self.verdict(link, paths) for link, paths in sorted(pending.items())}
        self.kb = update_knowledge_base(self.kb, events, day, verdicts, declared, self.quarantine_days)
        self.corpus.add(events)
        flagged = sum(v.flagged for v in verdicts.values())
        if verdicts:
            logger.info("day %d: %d new links, %d flagged", day, len(verdicts), flagged)
        return verdicts
