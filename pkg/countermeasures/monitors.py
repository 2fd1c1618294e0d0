"""
Private monitor deployments and how many poison links they expose.

A poison link is detected when one of its endpoints is a private monitor.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from exceptions import InvalidScenarioError, UndefinedRateError
from topology.as_graph import AsGraph, Asn, Link

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['strategy', 'm', 'trial', 'detection_rate']


class Strategy(Enum):
    RANDOM = "random"
    BEST_CASE = "best-case"


@dataclass(frozen=True)
class MonitorDeployment:
    monitors: FrozenSet[Asn]
    strategy: Strategy
    m: int


def select_monitors_random(graph: AsGraph, m: int, seed: int) -> MonitorDeployment:
    """Uniform sample of min(m, |nodes|) ASes without replacement."""
    if m < 1:
        raise InvalidScenarioError(f"need at least one monitor, got m={m}")
    nodes = sorted(graph.nodes)
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(nodes), size=min(m, len(nodes)), replace=False)
    return MonitorDeployment(frozenset(nodes[i] for i in picked), Strategy.RANDOM, m)


def select_monitors_best_case(traces: Sequence[Link], m: int, graph: Optional[AsGraph] = None) -> MonitorDeployment:
    """
    Greedy max-coverage over the recorded poison links.

    Repeatedly takes the AS touching the most still-undetected links, lowest
    ASN on ties. Once every link is covered, remaining slots go to the
    lowest unused ASNs of graph when one is given.
    """
    if m < 1:
        raise InvalidScenarioError(f"need at least one monitor, got m={m}")
    links = [tuple(link) for link in traces]
    if not links:
        raise InvalidScenarioError("best-case selection needs at least one recorded poison link")
    chosen: List[Asn] = []
    remaining = list(links)
    while len(chosen) < m and remaining:
        counts = Counter(asn for link in remaining for asn in set(link))
        best = min(counts, key=lambda asn: (-counts[asn], asn))
        chosen.append(best)
        remaining = [link for link in remaining if best not in link]
    if graph is not None and len(chosen) < m:
        spare = [asn for asn in sorted(graph.nodes) if asn not in chosen]
        chosen.extend(spare[:m - len(chosen)])
    return MonitorDeployment(frozenset(chosen), Strategy.BEST_CASE, m)


def detection_rate(links: Iterable[Link], deployment: MonitorDeployment) -> float:
    """Share of links with an endpoint among the monitors."""
    links = list(links)
    if not links:
        raise UndefinedRateError("detection rate of an empty link list")
    monitors = deployment.monitors
    return sum(1 for a, b in links if a in monitors or b in monitors) / len(links)


def sweep_detection(traces: Sequence[Link], graph: AsGraph, m_grid: Sequence[int], trials: int,
                    seed: int) -> pd.DataFrame:
    """
    Detection rates of random and best-case deployments over a grid of sizes.

    Best-case selection is deterministic; it is reported on every trial so
    rows pair up with the random ones.

    Returns:
        pd.DataFrame: strategy, m, trial, detection_rate
    """
    rows = []
    for m in m_grid:
        best = detection_rate(traces, select_monitors_best_case(traces, m, graph))
        for trial in range(trials):
            deployment = select_monitors_random(graph, m, seed + trial)
            rows.append({'strategy': Strategy.RANDOM.value, 'm': m, 'trial': trial,
                         'detection_rate': detection_rate(traces, deployment)})
            rows.append({'strategy': Strategy.BEST_CASE.value, 'm': m, 'trial': trial, 'detection_rate': best})
        logger.info("m=%d: best-case detection %.3f", m, best)
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    return frame.sort_values(['strategy', 'm', 'trial'], kind='mergesort').reset_index(drop=True)
