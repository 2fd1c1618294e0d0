"""
Gao-Rexford route propagation with optional route origin validation.

Routes for one prefix are computed in three passes, which reach the
same stable state as iterating best-route selection until nothing changes:

1. customer routes climb provider links, shortest first;
2. ASes without a customer route take the best route a peer learned from
   a customer (or originated);
3. every routed AS hands its route down to customers, shortest first.

Preference is customer > peer > provider, then shortest path, then lowest
next-hop ASN.
"""

import heapq
import logging
from typing import AbstractSet, Dict, Iterable, List, Optional, Tuple

from exceptions import UnknownOriginError
from routing_sim.routes import Announcement, RibSnapshot, RoaTable, Validation, full_path, group_by_prefix
from topology.as_graph import AsGraph, Asn
from topology.prefixes import Prefix

logger = logging.getLogger(__name__)

ORIGIN, CUSTOMER, PEER, PROVIDER = 0, 1, 2, 3


def _accepts(receiver: Asn, path: Tuple[Asn, ...], prefix: Prefix, roas: RoaTable,
             rov_ases: AbstractSet[Asn]) -> bool:
    if receiver in path:
        return False
    if receiver in rov_ases and roas.validate(prefix, path[-1]) is Validation.INVALID:
        return False
    return True


def propagate_prefix(graph: AsGraph, prefix: Prefix, announcements: List[Announcement], roas: RoaTable,
                     rov_ases: AbstractSet[Asn]) -> Dict[Asn, Announcement]:
    """Best route per AS for a single prefix."""
    best: Dict[Asn, Announcement] = {}
    kind: Dict[Asn, int] = {}

    for ann in sorted(announcements, key=lambda a: (len(a.as_path), a.as_path)):
        injector = ann.as_path[0]
        if injector not in best:
            best[injector] = Announcement(prefix, ann.as_path, injector)
            kind[injector] = ORIGIN

    def exported(asn: Asn) -> Tuple[Asn, ...]:
        return full_path(asn, best[asn])

    # 1. customer routes, up the hierarchy
    heap: List[Tuple[int, Asn, Asn]] = []
    for asn in sorted(best):
        for provider in graph.providers(asn):
            heapq.heappush(heap, (len(exported(asn)), asn, provider))
    while heap:
        _, sender, receiver = heapq.heappop(heap)
        if receiver in best:
            continue
        path = exported(sender)
        if not _accepts(receiver, path, prefix, roas, rov_ases):
            continue
        best[receiver] = Announcement(prefix, path, sender)
        kind[receiver] = CUSTOMER
        for provider in graph.providers(receiver):
            if provider not in best:
                heapq.heappush(heap, (len(path) + 1, receiver, provider))

    # 2. one peer hop from customer-routed ASes
    customer_routed = sorted(best)
    offers: Dict[Asn, Tuple[int, Asn]] = {}
    for sender in customer_routed:
        path = exported(sender)
        for receiver in graph.peers(sender):
            if receiver in best or not _accepts(receiver, path, prefix, roas, rov_ases):
                continue
            offer = (len(path), sender)
            if receiver not in offers or offer < offers[receiver]:
                offers[receiver] = offer
    for receiver, (_, sender) in offers.items():
        best[receiver] = Announcement(prefix, exported(sender), sender)
        kind[receiver] = PEER

    # 3. provider routes, down the hierarchy
    heap = []
    for sender in sorted(best):
        for customer in graph.customers(sender):
            if customer not in best:
                heapq.heappush(heap, (len(exported(sender)), sender, customer))
    while heap:
        _, sender, receiver = heapq.heappop(heap)
        if receiver in best:
            continue
        path = exported(sender)
        if not _accepts(receiver, path, prefix, roas, rov_ases):
            continue
        best[receiver] = Announcement(prefix, path, sender)
        kind[receiver] = PROVIDER
        for customer in graph.customers(receiver):
            if customer not in best:
                heapq.heappush(heap, (len(path) + 1, receiver, customer))

    return best


def propagate(graph: AsGraph, announcements: Iterable[Announcement], roas: Optional[RoaTable] = None,
              rov_ases: AbstractSet[Asn] = frozenset()) -> RibSnapshot:
    """
    Propagate announcements to every AS of the graph.

    Args:
        graph (AsGraph): Topology
        announcements (list): Routes injected at as_path[0]
        roas (RoaTable): Authorisations used by ROV ASes
        rov_ases (set): ASes dropping Invalid routes

    Returns:
        RibSnapshot: Selected route at each AS for each prefix

    Raises:
        UnknownOriginError: If an announcement's origin or injecting AS
            is not in the graph
    """
    roas = roas if roas is not None else RoaTable()
    announcements = list(announcements)
    for ann in announcements:
        for asn in (ann.as_path[0], ann.origin):
            if asn not in graph:
                raise UnknownOriginError(f"AS{asn} announcing {ann.prefix} is not in the graph")

    rov = frozenset(rov_ases)
    best: Dict[Tuple[Asn, Prefix], Announcement] = {}
    for prefix, group in sorted(group_by_prefix(announcements).items()):
        for asn, ann in propagate_prefix(graph, prefix, group, roas, rov).items():
            best[(asn, prefix)] = ann
    logger.debug("propagated %d announcements into %d RIB entries", len(announcements), len(best))
    return RibSnapshot(best)
