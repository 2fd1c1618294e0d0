"""
Type-0 / Type-1 hijacks and forged-origin poisoning announcements.
"""

import logging
from enum import Enum
from typing import AbstractSet, Collection, Iterable, Optional, Tuple

from exceptions import InvalidScenarioError, NoSubprefixError
from routing_sim.observation import observe
from routing_sim.propagation import propagate
from routing_sim.routes import Announcement, HijackOutcome, RibSnapshot, RoaTable, full_path
from topology.as_graph import AsGraph, Asn
from topology.prefixes import Prefix, first_subprefix

logger = logging.getLogger(__name__)


class HijackMode(Enum):
    TYPE0 = "type0"  # attacker claims to be the origin
    TYPE1 = "type1"  # attacker forges the victim as origin


class RoaMode(Enum):
    NONE = "none"
    CREATE_ROA = "create-roa"


def hijack_path(attacker: Asn, victim: Asn, mode: HijackMode) -> Tuple[Asn, ...]:
    return (attacker,) if mode is HijackMode.TYPE0 else (attacker, victim)


def attacker_share(graph: AsGraph, rib: RibSnapshot, attacker: Asn, victim: Asn, target: Prefix) -> float:
    """Share of ASes (attacker and victim excluded) forwarding target through the attacker."""
    others = [asn for asn in graph.nodes if asn not in (attacker, victim)]
    if not others:
        return 0.0
    captured = 0
    for asn in others:
        route = rib.forwarding_route(asn, target)
        if route is not None and attacker in full_path(asn, route):
            captured += 1
    return captured / len(others)


def simulate_hijack(graph: AsGraph, roas: RoaTable, rov_ases: AbstractSet[Asn], victim: Asn, attacker: Asn,
                    mode: HijackMode, prefix: Prefix, monitors: Iterable[Asn] = (), sub_prefix: bool = False,
                    time: int = 0) -> HijackOutcome:
    """
    Propagate the victim's route together with the attacker's hijack.

    Args:
        graph (AsGraph): Topology
        roas (RoaTable): Authorisations
        rov_ases (set): ASes performing ROV
        victim (int): Legitimate origin of prefix
        attacker (int): Hijacking AS
        mode (HijackMode): TYPE0 or TYPE1
        prefix (Prefix): Victim prefix
        monitors (iterable): ASes whose view is reported
        sub_prefix (bool): Announce the first half of prefix instead
        time (int): Observation timestamp

    Returns:
        HijackOutcome: Attacker share and monitor paths towards the attacker

    Raises:
        InvalidScenarioError: If attacker == victim
    """
    if attacker == victim:
        raise InvalidScenarioError(f"attacker and victim are both AS{victim}")
    target = first_subprefix(prefix) if sub_prefix else prefix
    legit = Announcement(prefix, (victim,), victim)
    forged = Announcement(target, hijack_path(attacker, victim, mode), attacker)
    rib = propagate(graph, [legit, forged], roas, rov_ases)

    share = attacker_share(graph, rib, attacker, victim, target)
    monitor_paths = tuple(
        event.path for event in observe(rib, monitors, time)
        if event.prefix == target and attacker in event.path
    )
    logger.debug("%s hijack AS%d -> AS%d: share %.3f, %d monitor paths",
                 mode.value, attacker, victim, share, len(monitor_paths))
    return HijackOutcome(attacker_share=share, monitor_paths=monitor_paths, rib=rib)


def fresh_subprefix(parent: Prefix, used: Collection[Prefix] = ()) -> Prefix:
    """
    First sub-prefix of parent not in used, shortest lengths first.

    Raises:
        NoSubprefixError: If parent is a /32 or every sub-prefix is used
    """
    if parent.prefixlen >= 32:
        raise NoSubprefixError(f"{parent} has no sub-prefix")
    taken = set(used)
    candidate = first_subprefix(parent)
    if candidate not in taken:
        return candidate
    for length in range(parent.prefixlen + 1, 33):
        for sub in parent.subnets(new_prefix=length):
            if sub not in taken:
                return sub
    raise NoSubprefixError(f"every sub-prefix of {parent} is in use")


def craft_poison_announcement(attacker: Asn, forged_origin: Asn, parent_prefix: Prefix,
                              roa_mode: RoaMode = RoaMode.NONE,
                              used: Collection[Prefix] = ()) -> Tuple[Announcement, RoaTable]:
    """
    Forged-origin announcement for a fresh sub-prefix of the attacker's prefix.

    Args:
        attacker (int): AS announcing the route (owner of parent_prefix)
        forged_origin (int): AS falsely listed as origin
        parent_prefix (Prefix): Prefix owned by the attacker
        roa_mode (RoaMode): NONE leaves the sub-prefix NotFound, CREATE_ROA
            authorises the forged origin for it
        used (collection): Sub-prefixes already spent on earlier poisoning

    Returns:
        tuple: (Announcement with path [attacker, forged_origin], ROA delta)

    Raises:
        InvalidScenarioError: If forged_origin == attacker
        NoSubprefixError: If parent_prefix has no free sub-prefix
    """
    if forged_origin == attacker:
        raise InvalidScenarioError(f"forged origin equals attacker AS{attacker}")
    sub = fresh_subprefix(parent_prefix, used)
    announcement = Announcement(sub, (attacker, forged_origin), attacker)
    delta = RoaTable({sub: {forged_origin}}) if roa_mode is RoaMode.CREATE_ROA else RoaTable()
    return announcement, delta
