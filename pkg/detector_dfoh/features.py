"""
Link features in four categories: topological, peering, AS-path pattern
and bidirectionality.
"""

import logging
import math
from dataclasses import astuple, dataclass, fields, replace
from typing import AbstractSet, Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from detector_dfoh.knowledge_base import KnowledgeBase
from exceptions import InsufficientDataError
from topology.as_graph import AsGraph, Asn, Link, Relationship, canonical_link, valley_free_with
from topology.metadata import AsMetadata, Metadata

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureVector:
    # topological
    deg_u: float = 0.0
    deg_v: float = 0.0
    common_neighbors: float = 0.0
    jaccard: float = 0.0
    adamic_adar: float = 0.0
    pref_attachment: float = 0.0
    # peering
    shared_ixps: float = 0.0
    shared_facilities: float = 0.0
    same_country: float = 0.0
    neighbor_country_overlap: float = 0.0
    # aspath pattern
    valley_free_flag: float = 1.0
    max_degree_gap: float = 0.0
    cone_ratio: float = 1.0
    # bidirectionality
    seen_both_directions: float = 0.0
    in_irr_stub: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


FEATURE_NAMES: Tuple[str, ...] = tuple(f.name for f in fields(FeatureVector))

CATEGORIES: Dict[str, Tuple[str, ...]] = {
    'topological': FEATURE_NAMES[0:6],
    'peering': FEATURE_NAMES[6:10],
    'aspath': FEATURE_NAMES[10:13],
    'bidirectionality': FEATURE_NAMES[13:15],
}

ASPATH_FEATURES = CATEGORIES['aspath']


def category_columns(categories: Sequence[str]) -> List[int]:
    """Column indices of the features belonging to the given categories."""
    unknown = [c for c in categories if c not in CATEGORIES]
    if unknown:
        raise KeyError(f"unknown feature categories: {unknown}")
    return [FEATURE_NAMES.index(name) for c in categories for name in CATEGORIES[c]]


def orient_link(link: Link, paths: Sequence[Sequence[Asn]]) -> Link:
    """
    Order a link as (upstream, downstream) following the first path using it.

    The downstream end is the one closer to the origin. Links not found on
    any path keep their given order.
    """
    u, v = link
    for path in paths:
        for a, b in zip(path, path[1:]):
            if {a, b} == {u, v}:
                return a, b
    return u, v


def link_suffixes(link: Link, paths: Sequence[Sequence[Asn]]) -> List[Tuple[Asn, ...]]:
    """Portion of each path starting at the link, for paths that contain it."""
    pair = set(link)
    suffixes = []
    for path in paths:
        for i in range(len(path) - 1):
            if {path[i], path[i + 1]} == pair:
                suffixes.append(tuple(path[i:]))
                break
    return suffixes


def _degree(view: nx.Graph, asn: Asn) -> int:
    return view.degree(asn) if asn in view else 0


def _topological(view: nx.Graph, u: Asn, v: Asn) -> Dict[str, float]:
    deg_u, deg_v = _degree(view, u), _degree(view, v)
    values = {'deg_u': float(deg_u), 'deg_v': float(deg_v), 'pref_attachment': float(deg_u * deg_v)}
    if u in view and v in view:
        pair = [(u, v)]
        values['common_neighbors'] = float(len(list(nx.common_neighbors(view, u, v))))
        values['jaccard'] = float(next(nx.jaccard_coefficient(view, pair))[2])
        values['adamic_adar'] = float(next(nx.adamic_adar_index(view, pair))[2])
    return values


def _neighbor_countries(view: nx.Graph, metadata: Metadata, asn: Asn) -> set:
    if asn not in view:
        return set()
    countries = set()
    for n in view.neighbors(asn):
        meta = metadata.get(n)
        if meta is not None and meta.country is not None:
            countries.add(meta.country)
    return countries


def _peering(view: nx.Graph, metadata: Metadata, u: Asn, v: Asn) -> Dict[str, float]:
    mu = metadata.get(u) or AsMetadata(u)
    mv = metadata.get(v) or AsMetadata(v)
    cu = _neighbor_countries(view, metadata, u)
    cv = _neighbor_countries(view, metadata, v)
    union = cu | cv
    return {
        'shared_ixps': float(len(mu.ixps & mv.ixps)),
        'shared_facilities': float(len(mu.facilities & mv.facilities)),
        'same_country': float(mu.country is not None and mu.country == mv.country),
        'neighbor_country_overlap': len(cu & cv) / len(union) if union else 0.0,
    }


def _known_lookup(kb: KnowledgeBase, relationships: Optional[AsGraph],
                  excluded: Optional[Link]) -> Callable[[Asn, Asn], Optional[Relationship]]:
    """Public relationships, limited to links the knowledge base holds."""
    def lookup(a: Asn, b: Asn) -> Optional[Relationship]:
        key = canonical_link(a, b)
        if relationships is None or key == excluded or not kb.is_known(key):
            return None
        return relationships.lookup(a, b)
    return lookup


def _cone_size(kb: KnowledgeBase, relationships: Optional[AsGraph], asn: Asn, excluded: Optional[Link]) -> int:
    if relationships is None or asn not in relationships:
        return 1
    memo_key = ('cone', id(relationships), asn, excluded)
    if memo_key in kb.memo:
        return kb.memo[memo_key]
    cone = {asn}
    stack = [asn]
    while stack:
        current = stack.pop()
        for customer in relationships.customers(current):
            key = canonical_link(current, customer)
            if customer in cone or key == excluded or not kb.is_known(key):
                continue
            cone.add(customer)
            stack.append(customer)
    kb.memo[memo_key] = len(cone)
    return len(cone)


def aspath_features(kb: KnowledgeBase, link: Link, observed_paths: Sequence[Sequence[Asn]],
                    relationships: Optional[AsGraph] = None, as_if_new: bool = True) -> Dict[str, float]:
    """
    Path-pattern features over the path suffixes starting at the link.

    valley_free_flag is 0 when any suffix is provably not valley-free (hops
    with no known relationship are wildcards); max_degree_gap is the largest
    log-degree jump between consecutive hops; cone_ratio compares the
    customer cones of the two endpoints.
    """
    u, v = link
    excluded = canonical_link(u, v)
    view = nx.restricted_view(kb.graph(), [], [(u, v)])
    suffixes = link_suffixes(link, observed_paths) or [(u, v)]
    lookup = _known_lookup(kb, relationships, excluded if as_if_new else None)

    valley_free = all(valley_free_with(lookup, suffix) for suffix in suffixes)
    gap = 0.0
    for suffix in suffixes:
        for a, b in zip(suffix, suffix[1:]):
            gap = max(gap, abs(math.log1p(_degree(view, a)) - math.log1p(_degree(view, b))))

    cone_excluded = excluded if as_if_new else None
    cu = _cone_size(kb, relationships, u, cone_excluded)
    cv = _cone_size(kb, relationships, v, cone_excluded)
    return {
        'valley_free_flag': float(valley_free),
        'max_degree_gap': gap,
        'cone_ratio': min(cu, cv) / max(cu, cv),
    }


def compute_features(kb: KnowledgeBase, metadata: Metadata, link: Link, observed_paths: Sequence[Sequence[Asn]],
                     relationships: Optional[AsGraph] = None, irr_links: AbstractSet[Link] = frozenset(),
                     as_if_new: bool = False) -> FeatureVector:
    """
    Feature vector of a candidate link.

    Args:
        kb (KnowledgeBase): Historical links; topological features are
            computed with the candidate link hidden
        metadata (dict): Asn -> AsMetadata
        link (tuple): (upstream, downstream) ASes
        observed_paths (list): Monitor paths containing the link
        relationships (AsGraph, optional): Public relationship dataset
        irr_links (set): Links registered in the IRR, canonical order
        as_if_new (bool): Also ignore what the knowledge base recorded
            about the link itself (relationship, directions)

    Returns:
        FeatureVector

    Raises:
        InsufficientDataError: If an endpoint is unknown to both the
            knowledge base and the metadata
    """
    u, v = link
    graph = kb.graph()
    for asn in (u, v):
        if asn not in graph and asn not in metadata:
            raise InsufficientDataError(f"no knowledge base or metadata entry for AS{asn}")

    view = nx.restricted_view(graph, [], [(u, v)])
    values: Dict[str, float] = {}
    values.update(_topological(view, u, v))
    values.update(_peering(view, metadata, u, v))
    values.update(aspath_features(kb, link, observed_paths, relationships, as_if_new))

    directions = {(a, b) for path in observed_paths for a, b in zip(path, path[1:]) if {a, b} == {u, v}}
    key = canonical_link(u, v)
    if not as_if_new and key in kb.links:
        directions |= kb.links[key].directions
    values['seen_both_directions'] = float((u, v) in directions and (v, u) in directions)
    values['in_irr_stub'] = float(key in irr_links)
    return FeatureVector(**values)


def with_path_features(base: FeatureVector, kb: KnowledgeBase, link: Link, path: Sequence[Asn],
                       relationships: Optional[AsGraph] = None, as_if_new: bool = False) -> FeatureVector:
    """Copy of a link-level vector with the aspath features of one path."""
    return replace(base, **aspath_features(kb, link, [path], relationships, as_if_new))
