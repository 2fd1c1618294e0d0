"""
Dynamic-threshold pollution against the BEAM-like detector.

The attacker replays the detector's threshold rule on public route changes,
then injects forged-origin changes scoring just below the threshold so the
next window's threshold rises.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from attacks.oscillation import OscillationModel
from detector_beam.embedding import EmbeddingTable
from detector_beam.pipeline import BeamDetector
from detector_beam.scoring import path_difference
from exceptions import InfeasiblePollutionError, InvalidScenarioError
from routing_sim.hijacks import fresh_subprefix
from routing_sim.routes import RouteChange, RouteEvent
from topology.as_graph import Asn
from topology.prefixes import Prefix

logger = logging.getLogger(__name__)

FEASIBLE = 'complete'
PARTIAL = 'partial'


@dataclass(frozen=True)
class PollutionAnnouncement:
    forged_origin: Asn
    prefix: Prefix
    expected_score: float


@dataclass(frozen=True)
class PollutionPlan:
    announcements: Tuple[PollutionAnnouncement, ...]
    old_path: Tuple[Asn, ...]
    theta: float
    epsilon: float
    status: str = FEASIBLE

    @property
    def n_distinct(self) -> int:
        return len(self.announcements)


@dataclass(frozen=True)
class PollutionResult:
    theta_before: float
    theta_after: float
    undetected_before: float
    undetected_after: float

    @property
    def gain(self) -> float:
        return self.undetected_after - self.undetected_before


def estimate_beam_threshold(events: Iterable[RouteChange], emb: EmbeddingTable, window_seconds: int = 3600,
                            k: float = 3.0, end: Optional[int] = None) -> float:
    """
    Threshold the detector derives from a public change stream.

    Uses the same warm-up rule as BeamDetector, so identical inputs give a
    bit-identical threshold.

    Raises:
        EstimationError: If the stream is empty or covers no full window
    """
    return BeamDetector(emb, window_seconds, k).warm_up(events, end)


def plan_threshold_pollution(emb: EmbeddingTable, theta: float, attacker: Asn, parent_prefix: Prefix,
                             reference_path: Sequence[Asn], n_distinct: int, epsilon: float = 0.05,
                             exclude: Iterable[Asn] = ()) -> PollutionPlan:
    """
    Forged origins whose route change scores just below theta.

    Every AS of the embedding is tried as forged origin B on the change
    reference_path -> reference_path + [B]; origins scoring inside
    (theta * (1 - epsilon), theta) are taken highest score first, each on
    its own sub-prefix of parent_prefix.

    Args:
        emb (EmbeddingTable): Role embeddings (public topology)
        theta (float): Estimated current threshold, > 0
        attacker (int): Announcing AS, last hop of reference_path
        parent_prefix (Prefix): Attacker's prefix
        reference_path (list): Observed monitor path towards the attacker
        n_distinct (int): Announcements wanted
        epsilon (float): Width of the band below theta

    Returns:
        PollutionPlan: status 'partial' when fewer than n_distinct fit

    Raises:
        InfeasiblePollutionError: If no origin scores below theta
    """
    if theta <= 0:
        raise InvalidScenarioError(f"threshold must be positive, got {theta}")
    old = tuple(reference_path)
    if not old or old[-1] != attacker:
        raise InvalidScenarioError(f"reference path {old} does not end at AS{attacker}")
    if n_distinct <= 0:
        return PollutionPlan((), old, theta, epsilon)

    skip = set(old) | set(exclude)
    scored: List[Tuple[float, Asn]] = []
    below = 0
    for b in emb.asns:
        if b in skip:
            continue
        score = path_difference(emb, RouteChange(prefix=parent_prefix, old_path=old, new_path=old + (b,), time=0))
        if score < theta:
            below += 1
            if score > theta * (1 - epsilon):
                scored.append((score, b))
    if below == 0:
        raise InfeasiblePollutionError(f"no forged origin scores below theta {theta:.4f}")

    scored.sort(key=lambda item: (-item[0], item[1]))
    used: List[Prefix] = []
    announcements = []
    for score, b in scored[:n_distinct]:
        sub = fresh_subprefix(parent_prefix, used)
        used.append(sub)
        announcements.append(PollutionAnnouncement(b, sub, score))
    status = FEASIBLE if len(announcements) == n_distinct else PARTIAL
    if status == PARTIAL:
        logger.warning("only %d of %d pollution announcements fit in (%.4f, %.4f)",
                       len(announcements), n_distinct, theta * (1 - epsilon), theta)
    return PollutionPlan(tuple(announcements), old, theta, epsilon, status)


def amplify(plan: PollutionPlan, model: OscillationModel, seed: int, start: int = 0,
            window_seconds: int = 3600) -> List[RouteChange]:
    """
    Replicate each announcement by a sampled oscillation multiplier.

    Copies get uniform timestamps in [start, start + window_seconds).
    """
    rng = np.random.default_rng(seed)
    multipliers = model.sample(plan.n_distinct, rng)
    changes = []
    for ann, times in zip(plan.announcements, multipliers):
        for t in rng.integers(0, window_seconds, int(times)):
            changes.append(RouteChange(prefix=ann.prefix, old_path=plan.old_path,
                                       new_path=plan.old_path + (ann.forged_origin,), time=start + int(t)))
    return sorted(changes, key=lambda c: (c.time, c.prefix, c.new_path))


def hijack_candidates(events: Iterable[RouteEvent], attackers: Sequence[Asn], victims: Sequence[Asn],
                      time: int = 0) -> List[RouteChange]:
    """
    Forged-origin hijack changes as a monitor would see them.

    For each (attacker, victim, monitor) where the monitor has routes to
    both: the monitor's path to the victim is replaced by its path to the
    attacker extended with the victim.
    """
    routes: Dict[Tuple[Asn, Asn], Tuple[Asn, ...]] = {}
    prefixes: Dict[Asn, Prefix] = {}
    for event in events:
        origin = event.announcement.origin
        routes[(event.monitor, origin)] = event.path
        prefixes[origin] = event.prefix
    monitors = sorted({m for m, _ in routes})
    changes = []
    for h in attackers:
        for v in victims:
            if h == v:
                continue
            for m in monitors:
                old, via = routes.get((m, v)), routes.get((m, h))
                if old is None or via is None or v in via:
                    continue
                changes.append(RouteChange(prefix=prefixes[v], old_path=old, new_path=via + (v,), time=time))
    return changes


def _closed_threshold(defender: BeamDetector, events: Sequence[RouteChange]) -> float:
    detector = defender.copy()
    detector.run(events)
    return detector.close_window()


def evaluate_pollution(defender: BeamDetector, baseline: Sequence[RouteChange], polluted: Sequence[RouteChange],
                       candidates: Sequence[RouteChange]) -> PollutionResult:
    """
    Thresholds reached after a clean and a polluted window, and how many
    hijack candidates each lets through.

    Args:
        defender (BeamDetector): Warmed-up detector; not modified
        baseline (list): Legitimate changes of the window
        polluted (list): The same window with the pollution added
        candidates (list): Hijack changes; undetected when score <= theta

    Returns:
        PollutionResult
    """
    theta_before = _closed_threshold(defender, baseline)
    theta_after = _closed_threshold(defender, polluted)
    scores = np.array([path_difference(defender.embedding, c) for c in candidates], dtype=np.float64)

    def undetected(theta: float) -> float:
        return float(np.mean(scores <= theta)) if len(scores) else 0.0

    result = PollutionResult(theta_before, theta_after, undetected(theta_before), undetected(theta_after))
    logger.info("pollution: theta %.4f -> %.4f, undetected %.3f -> %.3f",
                theta_before, theta_after, result.undetected_before, result.undetected_after)
    return result
