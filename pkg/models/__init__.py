"""
Saved detector state.
"""

from models.model_store import (
    ModelVersioning,
    load_embedding,
    load_forest,
    load_knowledge_base,
    save_embedding,
    save_forest,
    save_knowledge_base,
)

__all__ = [
    'ModelVersioning',
    'load_embedding',
    'load_forest',
    'load_knowledge_base',
    'save_embedding',
    'save_forest',
    'save_knowledge_base',
]
