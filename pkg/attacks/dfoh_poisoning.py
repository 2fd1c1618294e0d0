"""
Knowledge-base poisoning against the DFOH-like detector.

The attacker announces fresh sub-prefixes of its own prefix with forged
origins B that the detector lets through, so that the links (H, B) enter
the detector's history and make the later hijack link (H, V) look familiar.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

from attacks.model import AttackResult, AttackSpec, PlannerWeights, PoisonLink, PoisonPlan, SimContext
from detector_dfoh.knowledge_base import KnowledgeBase
from detector_dfoh.pipeline import DfohDetector, Verdict, classify_link
from exceptions import InsufficientDataError, NoPlanError
from routing_sim.hijacks import HijackMode, craft_poison_announcement, fresh_subprefix, simulate_hijack
from routing_sim.observation import observe
from routing_sim.propagation import propagate
from routing_sim.routes import Announcement
from topology.as_graph import AsGraph, Asn, Link, Relationship, canonical_link, customer_cone

logger = logging.getLogger(__name__)

Path = Tuple[Asn, ...]


def extend_paths(paths: Iterable[Sequence[Asn]], origin: Asn) -> List[Path]:
    """Attacker paths with a forged origin appended; paths already holding it are dropped."""
    return [tuple(p) + (origin,) for p in paths if origin not in p]


def _verdict(surrogate: DfohDetector, kb: KnowledgeBase, link: Link, paths: Sequence[Path]) -> Verdict:
    try:
        return classify_link(surrogate.forest, kb, surrogate.metadata, link, paths, surrogate.relationships,
                             surrogate.irr_links, surrogate.threshold)
    except InsufficientDataError:
        return Verdict(1.0, True, ())


def _with_link(kb: KnowledgeBase, link: Link) -> KnowledgeBase:
    poisoned = kb.copy()
    poisoned.insert(link, kb.day, directions=[link])
    return poisoned


def augment_transit(graph: AsGraph, attacker: Asn) -> Asn:
    """
    Transit AS the attacker would buy connectivity from.

    Highest-degree AS with customers that is not adjacent to the attacker
    and not inside its customer cone; lowest ASN on ties.

    Raises:
        NoPlanError: If no such AS exists
    """
    cone = customer_cone(graph, attacker)
    options = [a for a in graph.nodes
               if graph.customers(a) and a not in cone and not graph.has_edge(a, attacker)]
    if not options:
        raise NoPlanError(f"no transit provider available for AS{attacker}")
    return min(options, key=lambda a: (-graph.degree(a), a))


def poison_candidates(surrogate: DfohDetector, attacker: Asn, paths: Sequence[Path],
                      kb: Optional[KnowledgeBase] = None, exclude: Iterable[Asn] = ()) -> List[Asn]:
    """
    Forged origins B whose link (attacker, B) the surrogate does not flag.

    ASes already adjacent to the attacker in the knowledge base and ASes on
    the attacker's own paths are skipped.
    """
    kb = kb or surrogate.kb
    skip = {attacker, *exclude}
    skip.update(asn for path in paths for asn in path)
    skip.update(b if a == attacker else a for a, b in kb.links if attacker in (a, b))
    universe = sorted((set(kb.graph().nodes) | set(surrogate.metadata)) - skip)
    found = [b for b in universe if not _verdict(surrogate, kb, (attacker, b), extend_paths(paths, b)).flagged]
    logger.debug("AS%d: %d false-negative poison candidates out of %d", attacker, len(found), len(universe))
    return found


def rank_candidates(candidates: Iterable[Asn], victim: Asn, surrogate: DfohDetector, kb: KnowledgeBase,
                    weights: PlannerWeights) -> List[Asn]:
    """Order candidates by closeness to the victim: country, IXPs, degree, adjacency."""
    graph = kb.graph()
    meta_v = surrogate.metadata.get(victim)
    victim_neighbors = set(graph.neighbors(victim)) if victim in graph else set()

    def score(b: Asn) -> float:
        meta_b = surrogate.metadata.get(b)
        value = weights.degree * math.log1p(graph.degree(b) if b in graph else 0)
        if meta_b is not None and meta_v is not None:
            if meta_b.country is not None and meta_b.country == meta_v.country:
                value += weights.country
            value += weights.ixp * len(meta_b.ixps & meta_v.ixps)
        if b in victim_neighbors:
            value += weights.victim_neighbor
        return value

    return sorted(candidates, key=lambda b: (-score(b), b))


def plan_dfoh_poisoning(surrogate: DfohDetector, spec: AttackSpec, graph: Optional[AsGraph] = None,
                        weights: Optional[PlannerWeights] = None, lookahead: int = 8,
                        candidates: Optional[Sequence[Asn]] = None) -> PoisonPlan:
    """
    Greedy poisoning plan for one attacker / victim pair.

    Candidates are ranked, then at each step the first `lookahead` of them
    are tried on a copy of the knowledge base and the one giving the lowest
    suspicion of (H, V) is kept. Planning stops once (H, V) is no longer
    flagged or the budget is spent. Only paths observed from the attacker
    in the surrogate's corpus are used.

    Args:
        surrogate (DfohDetector): Attacker's replica of the detector
        spec (AttackSpec): Pair, budget and augmentation settings
        graph (AsGraph, optional): Public topology, needed for augmentation
        weights (PlannerWeights, optional): Ranking weights
        lookahead (int): Candidates tried per step
        candidates (list, optional): Precomputed poison_candidates for the
            attacker; the victim and its links are filtered out here

    Returns:
        PoisonPlan

    Raises:
        NoPlanError: Budget 0 with (H, V) flagged, no attacker paths, or no
            candidates and augmentation not allowed. The error carries an
            empty plan.
    """
    weights = weights or PlannerWeights()
    attacker, victim = spec.attacker, spec.victim
    kb = surrogate.kb
    paths = [tuple(p) for p in surrogate.corpus.paths_to(attacker)]
    hijack = extend_paths(paths, victim)
    if not hijack:
        raise NoPlanError(f"no observed path from AS{attacker} usable against AS{victim}", PoisonPlan())

    current = _verdict(surrogate, kb, spec.hijack_link, hijack)
    before = current.suspicion
    if not current.flagged:
        logger.debug("AS%d -> AS%d already evades (suspicion %.3f)", attacker, victim, before)
        return PoisonPlan((), True, before, before)
    empty = PoisonPlan((), False, before, before)
    if spec.budget == 0:
        raise NoPlanError(f"AS{attacker} -> AS{victim} is flagged and the budget is 0", empty)

    if candidates is None:
        candidates = poison_candidates(surrogate, attacker, paths, kb)
    pool = rank_candidates([b for b in candidates if b != victim], victim, surrogate, kb, weights)
    if not pool and not (spec.allow_transit_augmentation and graph is not None):
        raise NoPlanError(f"no poison candidate for AS{attacker} -> AS{victim}", empty)

    chosen: List[Asn] = []
    augmented: Optional[Asn] = None
    while len(chosen) < spec.budget and current.flagged:
        if not pool:
            if not spec.allow_transit_augmentation or graph is None or augmented is not None:
                break
            augmented = augment_transit(graph, attacker)
            kb = _with_link(kb, (augmented, attacker))
            paths = paths + extend_paths(surrogate.corpus.paths_to(augmented), attacker)
            hijack = extend_paths(paths, victim)
            fresh = poison_candidates(surrogate, attacker, paths, kb, exclude=[victim, *chosen])
            pool = rank_candidates(fresh, victim, surrogate, kb, weights)
            current = _verdict(surrogate, kb, spec.hijack_link, hijack)
            logger.debug("AS%d bought transit from AS%d: %d new candidates", attacker, augmented, len(pool))
            continue

        best: Optional[Tuple[float, Asn, KnowledgeBase, Verdict]] = None
        tried = pool[:lookahead]
        for b in tried:
            if _verdict(surrogate, kb, (attacker, b), extend_paths(paths, b)).flagged:
                continue
            trial = _with_link(kb, (attacker, b))
            verdict = _verdict(surrogate, trial, spec.hijack_link, hijack)
            if best is None or verdict.suspicion < best[0]:
                best = (verdict.suspicion, b, trial, verdict)
        if best is None:
            pool = pool[len(tried):]
            continue
        _, b, kb, current = best
        chosen.append(b)
        pool = [c for c in pool if c != b]

    used = []
    links = []
    for b in chosen:
        sub = fresh_subprefix(spec.parent_prefix, used)
        used.append(sub)
        links.append(PoisonLink(attacker, b, sub))
    plan = PoisonPlan(tuple(links), not current.flagged, before, current.suspicion, augmented)
    logger.debug("plan AS%d -> AS%d: %d links, suspicion %.3f -> %.3f, evasion %s",
                 attacker, victim, len(links), before, current.suspicion, plan.predicted_evasion)
    return plan


def _hijack_paths(paths: Iterable[Sequence[Asn]], link: Link) -> List[Path]:
    key = canonical_link(*link)
    return [tuple(p) for p in paths if any(canonical_link(a, b) == key for a, b in zip(p, p[1:]))]


def _wait_for_hijack(kb: KnowledgeBase, poison_links: Iterable[Link], spec: AttackSpec, day: int) -> int:
    """
    Age the knowledge base to the hijack day.

    Legitimate links keep being observed until then; poison links only while
    their announcement is up.
    """
    hijack_day = day + spec.hijack_delay_days
    poisoned = {canonical_link(*link) for link in poison_links}
    kb.refresh([link for link in kb.links if link not in poisoned], hijack_day)
    lifetime = spec.announcement_lifetime_days
    kb.refresh(poisoned, hijack_day if lifetime is None else min(hijack_day, day + lifetime - 1))
    kb.advance(hijack_day)
    return hijack_day


def execute_dfoh_attack(ctx: SimContext, defender: DfohDetector, plan: PoisonPlan, spec: AttackSpec,
                        day: int = 0, time: int = 0) -> AttackResult:
    """
    Run a poisoning plan against a copy of the defender, then hijack.

    Each poison announcement is propagated, observed by the public monitors
    and passed through the defender's detect / classify / update cycle one
    minute after the previous one. The forged-origin hijack follows and the
    defender's verdict on (H, V) decides evasion. Poison links the defender
    flags are counted and the attack goes on. With a hijack delay the
    knowledge base ages first, and poison links whose announcement lifetime
    ran out can fall out of the window.

    Returns:
        AttackResult
    """
    defender = defender.copy()
    attacker, victim = spec.attacker, spec.victim
    victim_prefix = ctx.prefixes[victim]
    fallback = extend_paths(defender.corpus.paths_to(attacker), victim)

    outcome = simulate_hijack(ctx.graph, ctx.roas, ctx.rov_ases, victim, attacker, HijackMode.TYPE1,
                              victim_prefix, ctx.monitors, time=time)
    observed = _hijack_paths(outcome.monitor_paths, spec.hijack_link) or fallback
    before = defender.verdict(spec.hijack_link, observed)

    graph, roas = ctx.graph, ctx.roas
    if plan.augmented_provider is not None:
        provider = plan.augmented_provider
        graph = graph.with_edge(provider, attacker, Relationship.PROVIDER_TO_CUSTOMER)
        own = Announcement(ctx.prefixes[attacker], (attacker,), attacker)
        events = observe(propagate(graph, [own], roas, ctx.rov_ases), ctx.monitors, time)
        defender.process(events, day, provider_links={(provider, attacker)})
        day += spec.wait_days

    used = []
    flagged = 0
    for i, poison in enumerate(plan.poison_links):
        announcement, delta = craft_poison_announcement(attacker, poison.forged_origin, spec.parent_prefix,
                                                        ctx.roa_mode, used)
        used.append(announcement.prefix)
        roas = roas.merged(delta)
        rib = propagate(graph, [announcement], roas, ctx.rov_ases)
        events = observe(rib, ctx.monitors, time + 60 * (i + 1))
        verdicts = defender.process(events, day)
        if verdicts.get(canonical_link(*poison.link), Verdict(0.0, False)).flagged:
            flagged += 1
            logger.debug("poison link %s flagged by the defender", poison.link)

    if spec.hijack_delay_days:
        _wait_for_hijack(defender.kb, [p.link for p in plan.poison_links], spec, day)

    if plan.augmented_provider is not None:
        outcome = simulate_hijack(graph, roas, ctx.rov_ases, victim, attacker, HijackMode.TYPE1, victim_prefix,
                                  ctx.monitors, time=time)
        observed = _hijack_paths(outcome.monitor_paths, spec.hijack_link) or fallback
    after = defender.verdict(spec.hijack_link, observed)
    result = AttackResult(
        attacker=attacker,
        victim=victim,
        evaded=not after.flagged,
        links_used=len(plan.poison_links),
        suspicion_before=before.suspicion,
        suspicion_after=after.suspicion,
        attacker_share=outcome.attacker_share,
        poison_flagged=flagged,
        poison_links=tuple(p.link for p in plan.poison_links),
    )
    logger.debug("attack AS%d -> AS%d: evaded %s, suspicion %.3f -> %.3f",
                 attacker, victim, result.evaded, before.suspicion, after.suspicion)
    return result
