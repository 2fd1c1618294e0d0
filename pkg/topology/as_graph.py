"""
AS-level graph with typed business relationships.
"""

import logging
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from exceptions import GenerationError, InvalidPathError, NotFoundError, RelationshipConflictError

logger = logging.getLogger(__name__)

Asn = int
Link = Tuple[Asn, Asn]

MAX_ASN = 4_294_967_295


class Relationship(Enum):
    """Business relationship between two ASes, read from the first AS's side."""

    PROVIDER_TO_CUSTOMER = -1
    PEER_TO_PEER = 0
    CUSTOMER_TO_PROVIDER = 1

    def reversed(self) -> "Relationship":
        return Relationship(-self.value)


def validate_asn(value) -> Asn:
    """
    Check that a value is a valid 32-bit ASN.

    Args:
        value: Candidate ASN

    Returns:
        int: The ASN

    Raises:
        ValueError: If the value is not an integer in 1..4294967295
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"ASN must be an integer, got {value!r}")
    if not 1 <= value <= MAX_ASN:
        raise ValueError(f"ASN out of range: {value}")
    return value


def canonical_link(a: Asn, b: Asn) -> Link:
    """Unordered link key."""
    return (a, b) if a < b else (b, a)


class AsGraph:
    """
    Immutable AS topology.

    Edges are stored as (provider, customer) for provider-to-customer
    relationships and as (low, high) for peerings. The adjacency index
    splits every node's neighbours by role.
    """

    def __init__(self, nodes: Iterable[Asn] = (), edges: Optional[Mapping[Link, Relationship]] = None):
        self._nodes: FrozenSet[Asn] = frozenset(nodes)
        self._edges: Dict[Link, Relationship] = {}
        self._providers: Dict[Asn, Set[Asn]] = {asn: set() for asn in self._nodes}
        self._customers: Dict[Asn, Set[Asn]] = {asn: set() for asn in self._nodes}
        self._peers: Dict[Asn, Set[Asn]] = {asn: set() for asn in self._nodes}
        self._nx: Optional[nx.Graph] = None

        for (a, b), rel in (edges or {}).items():
            if a == b:
                raise GenerationError(f"self-loop on AS{a}")
            if a not in self._nodes or b not in self._nodes:
                raise NotFoundError(f"edge ({a},{b}) references an unknown AS")
            if rel is Relationship.CUSTOMER_TO_PROVIDER:
                a, b, rel = b, a, Relationship.PROVIDER_TO_CUSTOMER
            if self.has_edge(a, b):
                raise RelationshipConflictError((a, b))
            if rel is Relationship.PROVIDER_TO_CUSTOMER:
                self._edges[(a, b)] = rel
                self._customers[a].add(b)
                self._providers[b].add(a)
            else:
                self._edges[canonical_link(a, b)] = rel
                self._peers[a].add(b)
                self._peers[b].add(a)

    @property
    def nodes(self) -> FrozenSet[Asn]:
        return self._nodes

    @property
    def edges(self) -> Dict[Link, Relationship]:
        return dict(self._edges)

    def __contains__(self, asn) -> bool:
        return asn in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AsGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self):
        return f"AsGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"

    def _require(self, asn: Asn) -> None:
        if asn not in self._nodes:
            raise NotFoundError(f"AS{asn} is not in the graph")

    def providers(self, asn: Asn) -> FrozenSet[Asn]:
        self._require(asn)
        return frozenset(self._providers[asn])

    def customers(self, asn: Asn) -> FrozenSet[Asn]:
        self._require(asn)
        return frozenset(self._customers[asn])

    def peers(self, asn: Asn) -> FrozenSet[Asn]:
        self._require(asn)
        return frozenset(self._peers[asn])

    def neighbors(self, asn: Asn) -> FrozenSet[Asn]:
        self._require(asn)
        return frozenset(self._providers[asn] | self._customers[asn] | self._peers[asn])

    def degree(self, asn: Asn) -> int:
        self._require(asn)
        return len(self._providers[asn]) + len(self._customers[asn]) + len(self._peers[asn])

    def has_edge(self, a: Asn, b: Asn) -> bool:
        return (a, b) in self._edges or (b, a) in self._edges

    def relationship(self, a: Asn, b: Asn) -> Relationship:
        """
        Relationship of the pair seen from a.

        Returns PROVIDER_TO_CUSTOMER when b is a's customer,
        CUSTOMER_TO_PROVIDER when b is a's provider and PEER_TO_PEER for
        peerings, whatever the query order.

        Raises:
            NotFoundError: If a and b are not adjacent
        """
        rel = self._edges.get((a, b))
        if rel is not None:
            return rel
        rel = self._edges.get((b, a))
        if rel is not None:
            return rel.reversed()
        raise NotFoundError(f"no relationship between AS{a} and AS{b}")

    def lookup(self, a: Asn, b: Asn) -> Optional[Relationship]:
        """Like relationship() but returns None for non-adjacent pairs."""
        try:
            return self.relationship(a, b)
        except NotFoundError:
            return None

    def edge_list(self) -> List[Tuple[Asn, Asn, int]]:
        """Sorted (a, b, rel) triples in CAIDA orientation."""
        return sorted((a, b, rel.value) for (a, b), rel in self._edges.items())

    def to_networkx(self) -> nx.Graph:
        """Undirected networkx view; cached, do not mutate."""
        if self._nx is None:
            g = nx.Graph()
            g.add_nodes_from(sorted(self._nodes))
            for (a, b), rel in sorted(self._edges.items()):
                g.add_edge(a, b, rel=rel.value, provider=a if rel is Relationship.PROVIDER_TO_CUSTOMER else None)
            self._nx = g
        return self._nx

    def is_connected(self) -> bool:
        if not self._nodes:
            return True
        return nx.is_connected(self.to_networkx())

    def with_edge(self, a: Asn, b: Asn, rel: Relationship) -> "AsGraph":
        """New graph with one more relationship; a is the provider for P2C."""
        edges = dict(self._edges)
        if rel is Relationship.CUSTOMER_TO_PROVIDER:
            a, b, rel = b, a, Relationship.PROVIDER_TO_CUSTOMER
        if self.has_edge(a, b):
            raise RelationshipConflictError((a, b))
        edges[(a, b) if rel is Relationship.PROVIDER_TO_CUSTOMER else canonical_link(a, b)] = rel
        return AsGraph(self._nodes | {a, b}, edges)

    def without_edge(self, a: Asn, b: Asn) -> "AsGraph":
        """New graph with the (a, b) relationship removed."""
        edges = {key: rel for key, rel in self._edges.items() if canonical_link(*key) != canonical_link(a, b)}
        return AsGraph(self._nodes, edges)

    def restricted_to(self, links: Iterable[Link]) -> "AsGraph":
        """Subgraph keeping only the given unordered links that exist here."""
        wanted = {canonical_link(a, b) for a, b in links}
        edges = {key: rel for key, rel in self._edges.items() if canonical_link(*key) in wanted}
        nodes = {asn for key in edges for asn in key}
        return AsGraph(nodes, edges)


def customer_cone(graph: AsGraph, asn: Asn, excluded_link: Optional[Link] = None) -> Set[Asn]:
    """
    Customer cone of an AS.

    Args:
        graph (AsGraph): Topology
        asn (int): AS whose cone is computed
        excluded_link (tuple, optional): Link treated as absent

    Returns:
        set: asn plus every AS reachable over provider-to-customer edges

    Raises:
        NotFoundError: If asn is not in the graph
    """
    if asn not in graph:
        raise NotFoundError(f"AS{asn} is not in the graph")
    skip = canonical_link(*excluded_link) if excluded_link else None
    cone = {asn}
    stack = [asn]
    while stack:
        current = stack.pop()
        for customer in graph.customers(current):
            if skip is not None and canonical_link(current, customer) == skip:
                continue
            if customer not in cone:
                cone.add(customer)
                stack.append(customer)
    return cone


# Valley-free automaton: state 0 = still climbing, state 1 = descending.
_UP, _DOWN = 0, 1


def _advance(states: Set[int], rel: Optional[Relationship]) -> Set[int]:
    candidates = [rel] if rel is not None else list(Relationship)
    nxt: Set[int] = set()
    for state in states:
        for hop in candidates:
            if hop is Relationship.CUSTOMER_TO_PROVIDER:
                if state == _UP:
                    nxt.add(_UP)
            elif hop is Relationship.PEER_TO_PEER:
                if state == _UP:
                    nxt.add(_DOWN)
            else:
                nxt.add(_DOWN)
    return nxt


def valley_free_with(lookup: Callable[[Asn, Asn], Optional[Relationship]], path: Sequence[Asn]) -> bool:
    """
    Valley-free test with a relationship lookup; unknown hops are wildcards.

    A hop whose relationship is unknown may take any role, so the result is
    True when some assignment of the unknown hops gives a valley-free path.
    """
    states = {_UP}
    for a, b in zip(path, path[1:]):
        states = _advance(states, lookup(a, b))
        if not states:
            return False
    return True


def is_valley_free(graph: AsGraph, path: Sequence[Asn]) -> bool:
    """
    Check a path against the Gao-Rexford pattern.

    Reading the path left to right: customer-to-provider hops, then at most
    one peer hop, then provider-to-customer hops.

    Args:
        graph (AsGraph): Topology
        path (list): AS sequence

    Returns:
        bool: True if the path is valley-free

    Raises:
        InvalidPathError: If a consecutive pair is not adjacent
    """
    for a, b in zip(path, path[1:]):
        if not graph.has_edge(a, b):
            raise InvalidPathError(f"AS{a} and AS{b} are not adjacent")
    return valley_free_with(graph.lookup, path)
