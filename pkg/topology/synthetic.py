"""
Seeded desk-scale substitutes for the Internet topology, PeeringDB and IRR.

The generator builds a three-tier hierarchy: a tier-1 peering clique,
tier-2 transit ASes buying transit from tier-1 or earlier tier-2 ASes, and
stubs buying transit from tier-2 ASes. Providers are picked by
preferential attachment on their current customer count.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from exceptions import GenerationError
from topology.as_graph import AsGraph, Link, Relationship, canonical_link
from topology.metadata import AsMetadata, Metadata

logger = logging.getLogger(__name__)

DEFAULT_COUNTRIES = ('US', 'DE', 'FR', 'GB', 'NL', 'BR', 'JP', 'IN', 'ZA', 'AU', 'RU', 'SG')


@dataclass(frozen=True)
class TopologyParams:
    """Tier sizes and degree targets for the synthetic generator."""

    tier1: int
    tier2: int = 0
    stub: int = 0
    tier2_providers: Tuple[int, int] = (1, 3)
    stub_providers: Tuple[int, int] = (1, 2)
    tier2_peers: float = 4.0

    @classmethod
    def from_dict(cls, params: Dict) -> "TopologyParams":
        known = {k: params[k] for k in cls.__dataclass_fields__ if k in params}
        for key in ('tier2_providers', 'stub_providers'):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)

    @property
    def size(self) -> int:
        return self.tier1 + self.tier2 + self.stub

    def validate(self) -> None:
        if self.tier1 < 1:
            raise GenerationError("tier1 must contain at least one AS")
        if self.tier2 < 0 or self.stub < 0:
            raise GenerationError("tier sizes cannot be negative")
        for name in ('tier2_providers', 'stub_providers'):
            low, high = getattr(self, name)
            if low < 1 or high < low:
                raise GenerationError(f"{name} must satisfy 1 <= min <= max, got {(low, high)}")
        if self.tier2 and self.tier2_providers[0] > self.tier1:
            raise GenerationError(
                f"the first tier-2 AS needs {self.tier2_providers[0]} providers but only "
                f"{self.tier1} tier-1 ASes exist")
        pool = self.tier2 if self.tier2 else self.tier1
        if self.stub and self.stub_providers[0] > pool:
            raise GenerationError(f"stubs need {self.stub_providers[0]} providers but the pool has {pool} ASes")
        if self.tier2_peers < 0:
            raise GenerationError("tier2_peers cannot be negative")


def _pick(rng: np.random.Generator, candidates: Sequence[int], weights: Dict[int, int], k: int) -> List[int]:
    w = np.array([weights[c] + 1 for c in candidates], dtype=float)
    chosen = rng.choice(len(candidates), size=min(k, len(candidates)), replace=False, p=w / w.sum())
    return [candidates[i] for i in sorted(chosen)]


def generate_synthetic_topology(params: TopologyParams, seed: int) -> AsGraph:
    """
    Generate a connected three-tier AS topology.

    Args:
        params (TopologyParams): Tier sizes and degree targets
        seed (int): Random seed

    Returns:
        AsGraph: Deterministic for a fixed (params, seed)

    Raises:
        GenerationError: If the parameters cannot be satisfied
    """
    params.validate()
    rng = np.random.default_rng(seed)

    tier1 = list(range(1, params.tier1 + 1))
    tier2 = list(range(params.tier1 + 1, params.tier1 + params.tier2 + 1))
    stubs = list(range(params.tier1 + params.tier2 + 1, params.size + 1))

    edges: Dict[Link, Relationship] = {}
    related: Set[Link] = set()
    customers = {asn: 0 for asn in tier1 + tier2}
    degree = {asn: 0 for asn in tier1 + tier2 + stubs}

    def connect(a: int, b: int, rel: Relationship) -> None:
        key = (a, b) if rel is Relationship.PROVIDER_TO_CUSTOMER else canonical_link(a, b)
        edges[key] = rel
        related.add(canonical_link(a, b))
        degree[a] += 1
        degree[b] += 1
        if rel is Relationship.PROVIDER_TO_CUSTOMER:
            customers[a] += 1

    for i, a in enumerate(tier1):
        for b in tier1[i + 1:]:
            connect(a, b, Relationship.PEER_TO_PEER)

    low, high = params.tier2_providers
    for i, asn in enumerate(tier2):
        candidates = tier1 + tier2[:i]
        k = int(rng.integers(low, high + 1))
        for provider in _pick(rng, candidates, customers, k):
            connect(provider, asn, Relationship.PROVIDER_TO_CUSTOMER)

    for asn in tier2:
        n_links = int(rng.poisson(params.tier2_peers / 2.0))
        candidates = [b for b in tier2 if b != asn and canonical_link(asn, b) not in related]
        if not n_links or not candidates:
            continue
        for peer in _pick(rng, candidates, degree, n_links):
            connect(asn, peer, Relationship.PEER_TO_PEER)

    pool = tier2 if tier2 else tier1
    low, high = params.stub_providers
    for asn in stubs:
        k = int(rng.integers(low, high + 1))
        for provider in _pick(rng, pool, customers, k):
            connect(provider, asn, Relationship.PROVIDER_TO_CUSTOMER)

    graph = AsGraph(tier1 + tier2 + stubs, edges)
    if not graph.is_connected():
        raise GenerationError("generated topology is not connected")
    logger.info("generated synthetic topology: %d ASes, %d links (seed %d)", len(graph), len(edges), seed)
    return graph


def _top_down_order(graph: AsGraph) -> List[int]:
    dag = nx.DiGraph()
    dag.add_nodes_from(graph.nodes)
    dag.add_edges_from((a, b) for (a, b), rel in graph.edges.items() if rel is Relationship.PROVIDER_TO_CUSTOMER)
    try:
        return list(nx.lexicographical_topological_sort(dag))
    except nx.NetworkXUnfeasible:
        logger.warning("provider hierarchy has a cycle; metadata assigned in ASN order")
        return sorted(graph.nodes)


def generate_synthetic_metadata(graph: AsGraph, seed: int, countries: Optional[Sequence[str]] = None,
                                n_ixps: Optional[int] = None) -> Metadata:
    """
    PeeringDB-lite metadata correlated with the topology.

    Customers tend to sit in a provider's country, peers tend to meet at a
    shared IXP, and facility memberships follow IXP memberships.

    Args:
        graph (AsGraph): Topology
        seed (int): Random seed
        countries (list, optional): Country code pool
        n_ixps (int, optional): Number of IXPs (default: one per 20 ASes)

    Returns:
        dict: ASN -> AsMetadata
    """
    rng = np.random.default_rng(seed)
    countries = list(countries or DEFAULT_COUNTRIES)
    n_ixps = n_ixps or max(2, len(graph) // 20)

    country: Dict[int, Optional[str]] = {}
    for asn in _top_down_order(graph):
        providers = sorted(graph.providers(asn))
        if providers and rng.random() < 0.7:
            country[asn] = country[providers[int(rng.integers(len(providers)))]]
        elif rng.random() < 0.02:
            country[asn] = None
        else:
            country[asn] = countries[int(rng.integers(len(countries)))]

    ixp_country = {ixp: countries[int(rng.integers(len(countries)))] for ixp in range(1, n_ixps + 1)}
    by_country: Dict[str, List[int]] = {}
    for ixp, code in ixp_country.items():
        by_country.setdefault(code, []).append(ixp)

    def local_ixp(asn: int) -> int:
        local = by_country.get(country[asn]) or sorted(ixp_country)
        return local[int(rng.integers(len(local)))]

    ixps: Dict[int, Set[int]] = {asn: set() for asn in graph.nodes}
    for asn in sorted(graph.nodes):
        chance = 0.8 if graph.degree(asn) >= 3 else 0.3
        if rng.random() < chance:
            ixps[asn].add(local_ixp(asn))
    for (a, b), rel in sorted(graph.edges.items()):
        if rel is Relationship.PEER_TO_PEER and rng.random() < 0.7:
            ixp = local_ixp(a)
            ixps[a].add(ixp)
            ixps[b].add(ixp)

    metadata: Metadata = {}
    for asn in sorted(graph.nodes):
        facilities = {ixp * 10 + int(rng.integers(1, 3)) for ixp in sorted(ixps[asn])}
        metadata[asn] = AsMetadata(asn=asn, country=country[asn], ixps=frozenset(ixps[asn]),
                                   facilities=frozenset(facilities))
    logger.debug("generated metadata for %d ASes over %d IXPs", len(metadata), n_ixps)
    return metadata


def generate_irr_links(graph: AsGraph, fraction: float, seed: int) -> Set[Link]:
    """Random share of the real links registered in a synthetic IRR."""
    rng = np.random.default_rng(seed)
    links = sorted(canonical_link(a, b) for a, b in graph.edges)
    count = int(math.floor(fraction * len(links)))
    if count == 0:
        return set()
    chosen = rng.choice(len(links), size=count, replace=False)
    return {links[i] for i in chosen}
