"""
BEAM-like route-change detector.
"""

from detector_beam.embedding import EmbeddingParams, EmbeddingTable, hierarchy_agreement, train_embedding
from detector_beam.pipeline import BeamDetector, ScoredChange
from detector_beam.scoring import cost_matrix, dtw, path_difference, role_difference
from detector_beam.threshold import ThresholdState, detect_change, update_threshold, window_threshold

__all__ = [
    'BeamDetector',
    'EmbeddingParams',
    'EmbeddingTable',
    'ScoredChange',
    'ThresholdState',
    'cost_matrix',
    'detect_change',
    'dtw',
    'hierarchy_agreement',
    'path_difference',
    'role_difference',
    'train_embedding',
    'update_threshold',
    'window_threshold',
]
