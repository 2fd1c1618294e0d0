"""
Bagged Gini decision forest stored as plain arrays.

Trees are grown with scikit-learn and flattened into feature / threshold /
child / class-count arrays, so prediction, importances and serialization
do not depend on the estimator objects.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.tree import DecisionTreeClassifier

from detector_dfoh.features import CATEGORIES, FEATURE_NAMES, category_columns
from exceptions import ParseError, TrainingError

logger = logging.getLogger(__name__)

LEAF = -1
# scikit-learn accepts 32-bit seeds only
SEED_RANGE = 2 ** 32
LEGITIMATE, HIJACK = 0, 1


@dataclass
class TreeArrays:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) weighted class counts

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaves(self, X: np.ndarray) -> np.ndarray:
        """Leaf reached by each row (x <= threshold goes left)."""
        X32 = np.asarray(X, dtype=np.float32)
        node = np.zeros(len(X32), dtype=np.int64)
        rows = np.arange(len(X32))
        active = self.feature[node] != LEAF
        while active.any():
            idx = rows[active]
            cur = node[idx]
            go_left = X32[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def votes(self, X: np.ndarray) -> np.ndarray:
        """1 where the reached leaf holds more hijack than legitimate weight."""
        counts = self.counts[self.leaves(X)]
        return (counts[:, HIJACK] > counts[:, LEGITIMATE]).astype(np.int64)

    def to_dict(self) -> Dict:
        return {
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'left': self.left.tolist(),
            'right': self.right.tolist(),
            'counts': self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "TreeArrays":
        return cls(
            feature=np.asarray(data['feature'], dtype=np.int64),
            threshold=np.asarray(data['threshold'], dtype=np.float64),
            left=np.asarray(data['left'], dtype=np.int64),
            right=np.asarray(data['right'], dtype=np.int64),
            counts=np.asarray(data['counts'], dtype=np.float64).reshape(-1, 2),
        )

    @classmethod
    def single_leaf(cls, y: np.ndarray, weights: np.ndarray) -> "TreeArrays":
        counts = np.array([[weights[y == LEGITIMATE].sum(), weights[y == HIJACK].sum()]], dtype=np.float64)
        return cls(np.array([LEAF]), np.array([0.0]), np.array([LEAF]), np.array([LEAF]), counts)

    @classmethod
    def from_sklearn(cls, clf: DecisionTreeClassifier) -> "TreeArrays":
        t = clf.tree_
        is_leaf = t.children_left == -1
        value = t.value[:, 0, :]
        totals = value.sum(axis=1, keepdims=True)
        fractions = np.divide(value, totals, out=np.zeros_like(value), where=totals > 0)
        counts = np.zeros((t.node_count, 2), dtype=np.float64)
        for j, cls_label in enumerate(clf.classes_):
            counts[:, int(cls_label)] = np.rint(fractions[:, j] * t.weighted_n_node_samples)
        return cls(
            feature=np.where(is_leaf, LEAF, t.feature).astype(np.int64),
            threshold=np.where(is_leaf, 0.0, t.threshold).astype(np.float64),
            left=np.where(is_leaf, LEAF, t.children_left).astype(np.int64),
            right=np.where(is_leaf, LEAF, t.children_right).astype(np.int64),
            counts=counts,
        )


@dataclass
class Forest:
    trees: List[TreeArrays]
    n_trees: int
    max_depth: int
    training_seed: int
    ablated: Tuple[str, ...] = ()
    feature_names: Tuple[str, ...] = field(default=FEATURE_NAMES)

    def prepare(self, X: np.ndarray) -> np.ndarray:
        """Zero the columns of ablated categories."""
        X = np.array(X, dtype=np.float64, ndmin=2)
        if self.ablated:
            X[:, category_columns(self.ablated)] = 0.0
        return X

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting hijack, per row."""
        X = self.prepare(X)
        if not self.trees:
            return np.zeros(len(X))
        votes = np.sum([tree.votes(X) for tree in self.trees], axis=0)
        return votes / len(self.trees)

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) > threshold).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps({
            'format': 'decision-forest/1',
            'n_trees': self.n_trees,
            'max_depth': self.max_depth,
            'training_seed': self.training_seed,
            'ablated': list(self.ablated),
            'feature_names': list(self.feature_names),
            'trees': [tree.to_dict() for tree in self.trees],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Forest":
        try:
            data = json.loads(text)
            forest = cls(
                trees=[TreeArrays.from_dict(t) for t in data['trees']],
                n_trees=int(data['n_trees']),
                max_depth=int(data['max_depth']),
                training_seed=int(data['training_seed']),
                ablated=tuple(data.get('ablated', ())),
                feature_names=tuple(data.get('feature_names', FEATURE_NAMES)),
            )
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"invalid forest document: {e}") from e
        for tree in forest.trees:
            internal = tree.feature != LEAF
            if np.any(tree.feature[internal] >= len(forest.feature_names)):
                raise ParseError("forest references an unknown feature index")
        return forest


def _fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int, seed: int, bootstrap_fraction: float) -> TreeArrays:
    rng = np.random.default_rng(seed)
    n = len(X)
    n_boot = max(1, int(round(bootstrap_fraction * n)))
    weights = np.bincount(rng.integers(0, n, n_boot), minlength=n).astype(np.float64)
    if max_depth == 0:
        return TreeArrays.single_leaf(y, weights)
    clf = DecisionTreeClassifier(criterion='gini', max_depth=max_depth, max_features='sqrt',
                                 random_state=seed % SEED_RANGE)
    clf.fit(X, y, sample_weight=weights)
    return TreeArrays.from_sklearn(clf)


def fit_forest(X: np.ndarray, y: np.ndarray, n_trees: int = 50, max_depth: int = 12, seed: int = 0,
               bootstrap_fraction: float = 1.0, ablate: Sequence[str] = (), jobs: int = 1) -> Forest:
    """
    Train a bagged forest; tree i uses seed + i for both bootstrap and splits.

    Args:
        X (np.ndarray): Feature matrix (rows in FEATURE_NAMES order)
        y (np.ndarray): 0 legitimate, 1 hijack
        n_trees (int): Number of trees
        max_depth (int): Depth limit; 0 yields single-leaf trees
        seed (int): Training seed
        bootstrap_fraction (float): Bootstrap sample size relative to len(X)
        ablate (list): Feature categories zeroed for training and inference
        jobs (int): Parallel tree builders; results do not depend on it

    Returns:
        Forest
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0 or len(X) != len(y):
        raise TrainingError(f"cannot train on {len(X)} samples with {len(y)} labels")
    forest = Forest([], n_trees, max_depth, seed, tuple(ablate))
    X = forest.prepare(X)
    forest.trees = Parallel(n_jobs=jobs)(
        delayed(_fit_tree)(X, y, max_depth, seed + i, bootstrap_fraction) for i in range(n_trees)
    )
    logger.info("trained forest: %d trees, depth %d, %d samples, ablated %s",
                n_trees, max_depth, len(X), list(ablate) or 'none')
    return forest


def _gini(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1)
    p = np.divide(counts, totals[:, None], out=np.zeros_like(counts), where=totals[:, None] > 0)
    return 1.0 - np.sum(p ** 2, axis=1)


def feature_importances(forest: Forest) -> Dict[str, float]:
    """
    Mean impurity-decrease importance, summed per category, normalized to 1.

    A forest without any split spreads the mass evenly over the categories
    that were not ablated.
    """
    n_features = len(forest.feature_names)
    per_tree = []
    for tree in forest.trees:
        weighted = tree.counts.sum(axis=1) * _gini(tree.counts)
        imp = np.zeros(n_features)
        for node in np.flatnonzero(tree.feature != LEAF):
            decrease = weighted[node] - weighted[tree.left[node]] - weighted[tree.right[node]]
            imp[tree.feature[node]] += max(decrease, 0.0)
        total = imp.sum()
        if total > 0:
            per_tree.append(imp / total)
    names = list(CATEGORIES)
    if not per_tree:
        kept = [c for c in names if c not in forest.ablated] or names
        return {c: (1.0 / len(kept) if c in kept else 0.0) for c in names}
    mean = np.mean(per_tree, axis=0)
    scores = {c: float(mean[category_columns([c])].sum()) for c in names}
    norm = sum(scores.values())
    return {c: s / norm for c, s in scores.items()}
