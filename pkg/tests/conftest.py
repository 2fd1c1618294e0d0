"""
Shared fixtures: a hand-drawn topology and a small seeded experiment world.
"""

import numpy as np
import pytest

from harness.experiment_config import load_config
from harness.world import build_world
from topology.as_graph import AsGraph, Relationship

P2C = Relationship.PROVIDER_TO_CUSTOMER
P2P = Relationship.PEER_TO_PEER


def random_small_graph(rng: np.random.Generator, n: int) -> AsGraph:
    """Provider hierarchy over 1..n (providers have lower ASNs) with a few peerings."""
    edges = {}
    for asn in range(2, n + 1):
        k = int(rng.integers(1, min(2, asn - 1) + 1))
        for provider in rng.choice(np.arange(1, asn), size=k, replace=False):
            edges[(int(provider), asn)] = P2C
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if (a, b) not in edges and rng.random() < 0.2:
                edges[(a, b)] = P2P
    return AsGraph(range(1, n + 1), edges)


@pytest.fixture
def small_graph():
    """
    Two peering tier-1s (1, 2) above a multihomed stub.

         1 ---- 2
        / \\     \\
       3   4     5
        \\ /      |
         6       7
    """
    edges = {
        (1, 2): P2P,
        (1, 3): P2C,
        (1, 4): P2C,
        (2, 5): P2C,
        (3, 6): P2C,
        (4, 6): P2C,
        (5, 7): P2C,
    }
    return AsGraph(range(1, 8), edges)


TINY_CONFIG = {
    'seed': 7,
    'topology': {'tier1': 3, 'tier2': 12, 'stub': 45, 'irr_fraction': 0.3},
    'routing': {'n_monitors': 10},
    'dfoh': {'n_trees': 9, 'max_depth': 6, 'n_per_class': 20, 'cv_folds': 3},
    'beam': {'dimension': 8, 'epochs': 5, 'batch_size': 256, 'background_changes': 40},
    'attack': {'budget': 2, 'allow_transit_augmentation': False, 'lookahead': 3},
    'oscillation': {},
    'monitors': {'m_grid': [5, 1], 'trials': 3},
    'campaign': {'n_attackers': 2, 'victims': 'sample-3', 'beam_attackers': 2, 'n_distinct': [0, 2]},
}


@pytest.fixture
def tiny_config(tmp_path):
    """60-AS experiment writing into a temporary directory."""
    return load_config({**TINY_CONFIG, 'out': str(tmp_path / 'results')})


@pytest.fixture(scope='session')
def tiny_world():
    return build_world(load_config(dict(TINY_CONFIG)))


@pytest.fixture
def random_graph():
    """Factory for seeded random hierarchies: random_graph(rng, n)."""
    return random_small_graph
