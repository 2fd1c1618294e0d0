"""
Dynamic detection threshold recomputed from the previous window's scores.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from detector_beam.embedding import EmbeddingTable
from detector_beam.scoring import path_difference
from exceptions import InvalidScenarioError, ThresholdNotInitializedError
from routing_sim.routes import RouteChange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdState:
    """
    Scores of the open window and the threshold derived from the last closed one.

    boundary is the start of the open window, aligned to window_seconds;
    theta stays None until the first window closes.
    """

    window_seconds: int = 3600
    k: float = 3.0
    include_flagged: bool = False
    theta: Optional[float] = None
    boundary: Optional[int] = None
    scores: Tuple[Tuple[int, float], ...] = field(default_factory=tuple)

    def window_start(self, now: int) -> int:
        return (now // self.window_seconds) * self.window_seconds

    def add(self, time: int, score: float) -> "ThresholdState":
        return replace(self, scores=self.scores + ((time, score),))


def window_threshold(scores, k: float) -> float:
    """mean + k * population std."""
    values = np.asarray(scores, dtype=np.float64)
    return float(values.mean() + k * values.std())


def update_threshold(state: ThresholdState, now: int) -> ThresholdState:
    """
    Advance the state to time now.

    When now has crossed into a later window, the open window closes and theta
    is recomputed from its scores (kept unchanged when it is empty). Any
    further windows skipped over are empty and leave theta as it is. Scores
    before the new open window are dropped.

    Raises:
        InvalidScenarioError: If now precedes the open window
    """
    if state.boundary is None:
        return replace(state, boundary=state.window_start(now))
    if now < state.boundary:
        raise InvalidScenarioError(f"time {now} precedes the open window starting at {state.boundary}")
    start = state.window_start(now)
    if start == state.boundary:
        return state
    end = state.boundary + state.window_seconds
    closed = [s for t, s in state.scores if state.boundary <= t < end]
    theta = window_threshold(closed, state.k) if closed else state.theta
    if closed:
        logger.debug("window [%d, %d): %d scores, theta %.4f", state.boundary, end, len(closed), theta)
    kept = tuple((t, s) for t, s in state.scores if t >= start)
    return replace(state, theta=theta, boundary=start, scores=kept)


def detect_change(emb: EmbeddingTable, state: ThresholdState,
                  change: RouteChange) -> Tuple[float, bool, ThresholdState]:
    """
    Score a route change against the current threshold.

    The score joins the open window unless it was flagged and the state
    excludes flagged scores.

    Raises:
        ThresholdNotInitializedError: If no window has closed yet
    """
    state = update_threshold(state, change.time)
    if state.theta is None:
        raise ThresholdNotInitializedError("threshold needs a warm-up window before detection")
    score = path_difference(emb, change)
    flagged = score > state.theta
    if not flagged or state.include_flagged:
        state = state.add(change.time, score)
    return score, flagged, state
