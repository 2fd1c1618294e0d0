"""
Persistence for trained detector state: forests, role embeddings and
knowledge-base snapshots, plus numbered checkpoints bundling them.
"""

import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional, Union

from detector_beam.embedding import EmbeddingTable
from detector_dfoh.forest import Forest
from detector_dfoh.knowledge_base import KnowledgeBase
from exceptions import NotFoundError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FOREST_FILE = 'forest.json'
EMBEDDING_FILE = 'embedding.txt'
KB_FILE = 'knowledge_base.csv'
METADATA_FILE = 'metadata.json'


def _write(path: PathLike, text: str) -> Path:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    Path(path).write_text(text)
    return Path(path)


def _read(path: PathLike) -> str:
    if not os.path.exists(path):
        raise NotFoundError(f"no saved model at {path}")
    return Path(path).read_text()


def save_forest(forest: Forest, path: PathLike) -> Path:
    return _write(path, forest.to_json())


def load_forest(path: PathLike) -> Forest:
    """
    Load a forest saved with save_forest.

    Raises:
        NotFoundError: If the file does not exist
        ParseError: If it is not a forest document
    """
    return Forest.from_json(_read(path))


def save_embedding(table: EmbeddingTable, path: PathLike) -> Path:
    return _write(path, table.to_text())


def load_embedding(path: PathLike) -> EmbeddingTable:
    return EmbeddingTable.from_text(_read(path))


def save_knowledge_base(kb: KnowledgeBase, path: PathLike) -> Path:
    return _write(path, kb.to_snapshot())


def load_knowledge_base(path: PathLike) -> KnowledgeBase:
    return KnowledgeBase.from_snapshot(_read(path))


class ModelVersioning:
    """Numbered checkpoint directories (v1, v2, ...) holding detector state."""

    def __init__(self, model_dir: PathLike = 'models/checkpoints'):
        self.model_dir = Path(model_dir)
        os.makedirs(self.model_dir, exist_ok=True)

    def _dir(self, version: int) -> Path:
        return self.model_dir / f'v{version}'

    def save_checkpoint(self, version: int, forest: Optional[Forest] = None, kb: Optional[KnowledgeBase] = None,
                        embedding: Optional[EmbeddingTable] = None, metadata: Optional[Dict] = None) -> Path:
        """
        Save whatever detector state is given under one version number.

        Args:
            version (int): Version number
            forest (Forest, optional): DFOH classifier
            kb (KnowledgeBase, optional): DFOH knowledge base
            embedding (EmbeddingTable, optional): BEAM role embedding
            metadata (dict, optional): Extra JSON metadata (config hash, scores)

        Returns:
            Path: Checkpoint directory
        """
        checkpoint = self._dir(version)
        os.makedirs(checkpoint, exist_ok=True)
        if forest is not None:
            save_forest(forest, checkpoint / FOREST_FILE)
        if kb is not None:
            save_knowledge_base(kb, checkpoint / KB_FILE)
        if embedding is not None:
            save_embedding(embedding, checkpoint / EMBEDDING_FILE)
        if metadata:
            with open(checkpoint / METADATA_FILE, 'w') as f:
                json.dump(metadata, f, indent=2, sort_keys=True)
        logger.info("saved checkpoint %s", checkpoint)
        return checkpoint

    def load_checkpoint(self, version: int) -> Dict[str, object]:
        """
        Load the state saved under a version.

        Returns:
            dict: Any of 'forest', 'kb', 'embedding', 'metadata' that were saved

        Raises:
            NotFoundError: If the version does not exist
        """
        checkpoint = self._dir(version)
        if not checkpoint.is_dir():
            raise NotFoundError(f"no checkpoint v{version} in {self.model_dir}")
        state: Dict[str, object] = {}
        if (checkpoint / FOREST_FILE).exists():
            state['forest'] = load_forest(checkpoint / FOREST_FILE)
        if (checkpoint / KB_FILE).exists():
            state['kb'] = load_knowledge_base(checkpoint / KB_FILE)
        if (checkpoint / EMBEDDING_FILE).exists():
            state['embedding'] = load_embedding(checkpoint / EMBEDDING_FILE)
        if (checkpoint / METADATA_FILE).exists():
            with open(checkpoint / METADATA_FILE) as f:
                state['metadata'] = json.load(f)
        return state

    def list_checkpoints(self) -> List[int]:
        versions = []
        for item in os.listdir(self.model_dir):
            if item.startswith('v') and item[1:].isdigit() and (self.model_dir / item).is_dir():
                versions.append(int(item[1:]))
        return sorted(versions)

    def next_version(self) -> int:
        existing = self.list_checkpoints()
        return existing[-1] + 1 if existing else 1
