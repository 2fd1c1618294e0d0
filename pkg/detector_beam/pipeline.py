"""
BEAM-like detector: embedding, threshold state and a score log.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import pandas as pd

from detector_beam.embedding import EmbeddingTable
from detector_beam.scoring import path_difference
from detector_beam.threshold import ThresholdState, detect_change, update_threshold
from exceptions import EstimationError
from routing_sim.routes import RouteChange

logger = logging.getLogger(__name__)

SCORE_LOG_COLUMNS = ['time', 'prefix', 'score', 'theta', 'flagged']


@dataclass(frozen=True)
class ScoredChange:
    time: int
    prefix: str
    score: float
    theta: float
    flagged: bool


def _ordered(changes: Iterable[RouteChange]) -> List[RouteChange]:
    return sorted(changes, key=lambda c: (c.time, c.prefix, c.old_path, c.new_path))


class BeamDetector:
    """
    Route-change detector with a dynamic threshold.

    Args:
        embedding (EmbeddingTable): Trained role embeddings
        window_seconds (int): Threshold window length
        k (float): Standard deviation multiplier
        include_flagged (bool): Let flagged scores into the next window
    """

    def __init__(self, embedding: EmbeddingTable, window_seconds: int = 3600, k: float = 3.0,
                 include_flagged: bool = False):
        self.embedding = embedding
        self.state = ThresholdState(window_seconds=window_seconds, k=k, include_flagged=include_flagged)
        self.log: List[ScoredChange] = []

    @property
    def theta(self) -> Optional[float]:
        return self.state.theta

    def copy(self) -> "BeamDetector":
        """Same embedding and threshold state, separate log."""
        clone = BeamDetector(self.embedding)
        clone.state = self.state
        return clone

    def close_window(self) -> Optional[float]:
        """Close the open window now and return the resulting threshold."""
        if self.state.boundary is not None:
            self.state = update_threshold(self.state, self.state.boundary + self.state.window_seconds)
        return self.state.theta

    def warm_up(self, changes: Iterable[RouteChange], end: Optional[int] = None) -> float:
        """
        Fill windows with unflagged scores and close every window the stream covers.

        A window is covered once observation reaches its end. A trailing
        partial window stays open and closes during detection.

        Args:
            changes (list): Route changes observed during warm-up
            end (int, optional): Time observation reached; defaults
                to the last change's time

        Returns:
            float: Threshold in force afterwards

        Raises:
            EstimationError: If the stream is empty or covers no full window
        """
        changes = _ordered(changes)
        if not changes:
            raise EstimationError("warm-up needs at least one route change")
        end = changes[-1].time if end is None else end
        first = self.state.window_start(changes[0].time)
        if end < changes[-1].time or end < first + self.state.window_seconds:
            raise EstimationError(f"changes observed over [{changes[0].time}, {end}) do not cover the "
                                  f"{self.state.window_seconds} s window starting at {first}")
        state = self.state
        for change in changes:
            state = update_threshold(state, change.time)
            state = state.add(change.time, path_difference(self.embedding, change))
        self.state = update_threshold(state, end)
        logger.info("warm-up over %d changes: theta %.4f", len(changes), self.state.theta)
        return self.state.theta

    def score(self, change: RouteChange) -> ScoredChange:
        score, flagged, self.state = detect_change(self.embedding, self.state, change)
        row = ScoredChange(change.time, str(change.prefix), score, self.state.theta, flagged)
        self.log.append(row)
        if flagged:
            logger.debug("flagged change for %s at %d: score %.4f > theta %.4f",
                         change.prefix, change.time, score, self.state.theta)
        return row

    def run(self, changes: Iterable[RouteChange]) -> List[ScoredChange]:
        """Score changes in time order."""
        return [self.score(change) for change in _ordered(changes)]

    def score_log(self) -> pd.DataFrame:
        return pd.DataFrame([vars(row) for row in self.log], columns=SCORE_LOG_COLUMNS)

    def write_score_log(self, path: str) -> None:
        self.score_log().to_csv(path, index=False)
