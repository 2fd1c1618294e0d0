"""
Unit tests for saved detector state and numbered checkpoints.
"""

import numpy as np
import pytest

from detector_beam import EmbeddingTable
from detector_dfoh import KnowledgeBase
from detector_dfoh.features import FEATURE_NAMES
from detector_dfoh.forest import fit_forest
from exceptions import NotFoundError, ParseError
from models.model_store import (
    ModelVersioning,
    load_embedding,
    load_forest,
    load_knowledge_base,
    save_embedding,
    save_forest,
    save_knowledge_base,
)


@pytest.fixture
def forest():
    rng = np.random.default_rng(0)
    X = rng.random((80, len(FEATURE_NAMES)))
    y = (X[:, 0] > 0.5).astype(np.int64)
    return fit_forest(X, y, n_trees=3, max_depth=3, seed=1), X


@pytest.fixture
def kb():
    kb = KnowledgeBase(window_days=30, day=2)
    kb.insert((1, 2), 0, directions=[(1, 2)])
    kb.insert((2, 3), 2, quarantine_until=40)
    return kb


@pytest.fixture
def embedding():
    return EmbeddingTable([1, 2, 3], np.array([[0.0, 1.0], [2.0, 0.5], [1.0, 1.0]]), np.array([0.0, 1.0, 2.0]),
                          lam=0.5)


class TestSaveLoad:
    """Test suite for single-object persistence."""

    def test_forest(self, tmp_path, forest):
        model, X = forest
        path = save_forest(model, tmp_path / 'nested' / 'forest.json')
        assert path.exists()
        assert np.array_equal(load_forest(path).predict_proba(X), model.predict_proba(X))

    def test_knowledge_base(self, tmp_path, kb):
        restored = load_knowledge_base(save_knowledge_base(kb, tmp_path / 'kb.csv'))
        assert restored.links == kb.links
        assert restored.quarantine == kb.quarantine
        assert not restored.is_known((2, 3))

    def test_embedding(self, tmp_path, embedding):
        assert load_embedding(save_embedding(embedding, tmp_path / 'embedding.txt')) == embedding

    def test_missing_file(self, tmp_path):
        with pytest.raises(NotFoundError):
            load_forest(tmp_path / 'absent.json')

    def test_wrong_document(self, tmp_path):
        (tmp_path / 'forest.json').write_text('not json')
        with pytest.raises(ParseError):
            load_forest(tmp_path / 'forest.json')


class TestModelVersioning:
    """Test suite for checkpoint directories."""

    @pytest.fixture
    def versioning(self, tmp_path):
        return ModelVersioning(tmp_path / 'checkpoints')

    def test_empty(self, versioning):
        assert versioning.list_checkpoints() == []
        assert versioning.next_version() == 1

    def test_save_and_load(self, versioning, forest, kb, embedding):
        model, X = forest
        versioning.save_checkpoint(1, forest=model, kb=kb, embedding=embedding, metadata={'config_hash': 'abc'})
        state = versioning.load_checkpoint(1)
        assert set(state) == {'forest', 'kb', 'embedding', 'metadata'}
        assert np.array_equal(state['forest'].predict_proba(X), model.predict_proba(X))
        assert state['kb'].links == kb.links
        assert state['embedding'] == embedding
        assert state['metadata'] == {'config_hash': 'abc'}

    def test_partial_checkpoint(self, versioning, embedding):
        versioning.save_checkpoint(3, embedding=embedding)
        assert set(versioning.load_checkpoint(3)) == {'embedding'}

    def test_versions_are_numeric(self, versioning, embedding):
        for version in (2, 10, 1):
            versioning.save_checkpoint(version, embedding=embedding)
        (versioning.model_dir / 'vlatest').mkdir()
        assert versioning.list_checkpoints() == [1, 2, 10]
        assert versioning.next_version() == 11

    def test_missing_version(self, versioning):
        with pytest.raises(NotFoundError):
            versioning.load_checkpoint(4)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
