"""
DFOH-like forged-origin link detector.
"""

from detector_dfoh.corpus import PathCorpus
from detector_dfoh.features import (
    CATEGORIES,
    FEATURE_NAMES,
    FeatureVector,
    aspath_features,
    compute_features,
    orient_link,
)
from detector_dfoh.forest import Forest, TreeArrays, feature_importances, fit_forest
from detector_dfoh.knowledge_base import KnowledgeBase, LinkRecord, detect_new_links, update_knowledge_base
from detector_dfoh.pipeline import DfohDetector, Verdict, aggregate, classify_link
from detector_dfoh.training import SamplingConfig, TrainingSet, build_training_set, cross_validate, train_classifier

__all__ = [
    'CATEGORIES',
    'FEATURE_NAMES',
    'DfohDetector',
    'FeatureVector',
    'Forest',
    'KnowledgeBase',
    'LinkRecord',
    'PathCorpus',
    'SamplingConfig',
    'TrainingSet',
    'TreeArrays',
    'Verdict',
    'aggregate',
    'aspath_features',
    'build_training_set',
    'classify_link',
    'compute_features',
    'cross_validate',
    'detect_new_links',
    'feature_importances',
    'fit_forest',
    'orient_link',
    'train_classifier',
    'update_knowledge_base',
]
