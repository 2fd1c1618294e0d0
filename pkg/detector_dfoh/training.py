"""
Cluster-balanced training set construction, forest training and
cross-validation for the link classifier.
"""

import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold

from detector_dfoh.corpus import PathCorpus
from detector_dfoh.features import compute_features, orient_link
from detector_dfoh.forest import HIJACK, LEGITIMATE, SEED_RANGE, Forest, fit_forest
from detector_dfoh.knowledge_base import KnowledgeBase
from exceptions import InsufficientDataError, TrainingError
from topology.as_graph import AsGraph, Asn, Link, canonical_link
from topology.metadata import Metadata

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingConfig:
    n_per_class: int = 500
    n_trees: int = 50
    max_depth: int = 12
    bootstrap_fraction: float = 1.0
    ablate: Tuple[str, ...] = ()
    cv_folds: int = 5

    @classmethod
    def from_dict(cls, config: Dict) -> "SamplingConfig":
        return cls(
            n_per_class=int(config.get('n_per_class', cls.n_per_class)),
            n_trees=int(config.get('n_trees', cls.n_trees)),
            max_depth=int(config.get('max_depth', cls.max_depth)),
            bootstrap_fraction=float(config.get('bootstrap_fraction', cls.bootstrap_fraction)),
            ablate=tuple(config.get('ablate', ())),
            cv_folds=int(config.get('cv_folds', cls.cv_folds)),
        )


@dataclass
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    links: List[Link] = field(default_factory=list)


def cluster_labels(kb: KnowledgeBase, metadata: Metadata) -> Dict[Asn, Tuple[int, Optional[str]]]:
    """Degree quartile x country bucket of every AS in the knowledge base graph."""
    graph = kb.graph()
    nodes = sorted(graph.nodes)
    if not nodes:
        return {}
    degrees = np.array([graph.degree(n) for n in nodes], dtype=np.float64)
    edges = np.quantile(degrees, [0.25, 0.5, 0.75])
    quartiles = np.searchsorted(edges, degrees, side='left')
    labels = {}
    for asn, q in zip(nodes, quartiles):
        meta = metadata.get(asn)
        labels[asn] = (int(q), meta.country if meta is not None else None)
    return labels


def _round_robin(groups: Dict, n: int, rng: np.random.Generator) -> List:
    """Draw up to n items, one per cluster per round, clusters in sorted order."""
    pools = {}
    for key in sorted(groups, key=repr):
        items = list(groups[key])
        rng.shuffle(items)
        pools[key] = items
    picked: List = []
    while len(picked) < n and any(pools.values()):
        for key in list(pools):
            if pools[key] and len(picked) < n:
                picked.append(pools[key].pop())
    return picked


def build_training_set(kb: KnowledgeBase, metadata: Metadata, corpus: PathCorpus, n_per_class: int, seed: int,
                       relationships: Optional[AsGraph] = None,
                       irr_links: AbstractSet[Link] = frozenset()) -> TrainingSet:
    """
    Legitimate and forged link samples, balanced across AS clusters.

    Positives are knowledge base links with features computed as if they
    were new. Negatives are forged links (a, b) between an announcer a and
    an AS b it is not connected to, seen on a's own paths extended by b.

    Raises:
        TrainingError: If the knowledge base holds fewer than 2 * n_per_class
            links or not enough samples can be built
    """
    active = kb.active_links()
    if len(active) < 2 * n_per_class:
        raise TrainingError(f"knowledge base has {len(active)} links, need {2 * n_per_class}")
    rng = np.random.default_rng(seed)
    labels = cluster_labels(kb, metadata)
    graph = kb.graph()

    def cluster_of(link: Link):
        low = min(link, key=lambda a: (graph.degree(a) if a in graph else 0, a))
        return labels.get(low)

    groups: Dict = {}
    for link in active:
        if corpus.paths_with(link):
            groups.setdefault(cluster_of(link), []).append(link)

    rows: List[np.ndarray] = []
    targets: List[int] = []
    links: List[Link] = []
    for link in _round_robin(groups, n_per_class, rng):
        paths = corpus.paths_with(link)
        oriented = orient_link(link, paths)
        vector = compute_features(kb, metadata, oriented, paths, relationships, irr_links, as_if_new=True)
        rows.append(vector.to_array())
        targets.append(LEGITIMATE)
        links.append(oriented)

    announcers = corpus.origins()
    by_cluster: Dict = {}
    for asn, label in labels.items():
        by_cluster.setdefault(label, []).append(asn)
    clusters = sorted(by_cluster, key=repr)
    negatives = 0
    attempts = 0
    while negatives < n_per_class and announcers and attempts < 50 * n_per_class:
        cluster = clusters[attempts % len(clusters)]
        attempts += 1
        members = by_cluster[cluster]
        b = members[int(rng.integers(len(members)))]
        a = announcers[int(rng.integers(len(announcers)))]
        if a == b or canonical_link(a, b) in kb.links:
            continue
        forged = [p + (b,) for p in corpus.paths_to(a) if b not in p]
        if not forged:
            continue
        try:
            vector = compute_features(kb, metadata, (a, b), forged, relationships, irr_links)
        except InsufficientDataError:
            continue
        rows.append(vector.to_array())
        targets.append(HIJACK)
        links.append((a, b))
        negatives += 1

    counts = np.bincount(np.asarray(targets, dtype=np.int64), minlength=2)
    if counts.min() == 0:
        raise TrainingError(f"could not build both classes (legitimate {counts[0]}, forged {counts[1]})")
    logger.info("training set: %d legitimate, %d forged links from %d clusters",
                counts[0], counts[1], len(groups))
    return TrainingSet(np.vstack(rows), np.asarray(targets, dtype=np.int64), links)


def train_classifier(kb: KnowledgeBase, metadata: Metadata, sampling: SamplingConfig, seed: int,
                     corpus: PathCorpus, relationships: Optional[AsGraph] = None,
                     irr_links: AbstractSet[Link] = frozenset(), jobs: int = 1) -> Forest:
    """Build the balanced training set and fit the forest on it."""
    data = build_training_set(kb, metadata, corpus, sampling.n_per_class, seed, relationships, irr_links)
    return fit_forest(data.X, data.y, sampling.n_trees, sampling.max_depth, seed,
                      sampling.bootstrap_fraction, sampling.ablate, jobs)


def cross_validate(data: TrainingSet, sampling: SamplingConfig, seed: int, ablate: Optional[Sequence[str]] = None,
                   jobs: int = 1) -> float:
    """
    Mean held-out accuracy over stratified folds.

    Args:
        data (TrainingSet): Samples
        sampling (SamplingConfig): Forest parameters and fold count
        seed (int): Fold shuffling and forest seed
        ablate (list, optional): Overrides sampling.ablate

    Returns:
        float: Accuracy in [0, 1]
    """
    ablate = sampling.ablate if ablate is None else tuple(ablate)
    folds = StratifiedKFold(n_splits=sampling.cv_folds, shuffle=True, random_state=seed % SEED_RANGE)
    scores = []
    for train_idx, test_idx in folds.split(data.X, data.y):
        forest = fit_forest(data.X[train_idx], data.y[train_idx], sampling.n_trees, sampling.max_depth, seed,
                            sampling.bootstrap_fraction, ablate, jobs)
        scores.append(float(np.mean(forest.predict(data.X[test_idx]) == data.y[test_idx])))
    accuracy = float(np.mean(scores))
    logger.info("cross-validated accuracy %.3f (ablated: %s)", accuracy, list(ablate) or 'none')
    return accuracy
