"""
Role differences between ASes and DTW path differences between routes.
"""

from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from detector_beam.embedding import EmbeddingTable
from exceptions import InvalidChangeError
from routing_sim.routes import RouteChange
from topology.as_graph import Asn


def role_difference(emb: EmbeddingTable, u: Asn, v: Asn, lam: Optional[float] = None) -> float:
    """||vec(u) - vec(v)|| + lambda * |hier(u) - hier(v)|; NotFoundError for unknown ASes."""
    lam = emb.lam if lam is None else lam
    return float(np.linalg.norm(emb.vector(u) - emb.vector(v)) + lam * abs(emb.hier(u) - emb.hier(v)))


def cost_matrix(emb: EmbeddingTable, old: Sequence[Asn], new: Sequence[Asn], lam: Optional[float] = None) -> np.ndarray:
    """Pairwise role differences, old hops as rows."""
    lam = emb.lam if lam is None else lam
    ro, rn = emb.rows(old), emb.rows(new)
    dist = cdist(emb.vectors[ro], emb.vectors[rn])
    return dist + lam * np.abs(emb.hierarchy[ro][:, None] - emb.hierarchy[rn][None, :])


def dtw(cost: np.ndarray) -> float:
    """Cheapest monotone alignment from (0, 0) to (n-1, m-1)."""
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


def path_difference(emb: EmbeddingTable, change: RouteChange, lam: Optional[float] = None) -> float:
    """
    DTW distance between the old and new path, divided by the longer length.

    Raises:
        InvalidChangeError: If a path is empty
        NotFoundError: If a hop has no embedding
    """
    old, new = tuple(change.old_path), tuple(change.new_path)
    if not old or not new:
        raise InvalidChangeError("route change with an empty path")
    return dtw(cost_matrix(emb, old, new, lam)) / max(len(old), len(new))
