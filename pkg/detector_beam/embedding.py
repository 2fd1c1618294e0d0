"""
AS role embeddings: proximity vectors plus a scalar hierarchy position.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from exceptions import NotFoundError, ParseError, TrainingError
from topology.as_graph import AsGraph, Asn, Relationship

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingParams:
    dimension: int = 64
    epochs: int = 50
    learning_rate: float = 0.05
    hierarchy_margin: float = 0.1
    negative_samples: int = 5
    batch_size: int = 1024
    neighbor_pairs: int = 10
    lam: float = 1.0

    @classmethod
    def from_dict(cls, config: Dict) -> "EmbeddingParams":
        return cls(
            dimension=int(config.get('dimension', cls.dimension)),
            epochs=int(config.get('epochs', cls.epochs)),
            learning_rate=float(config.get('learning_rate', cls.learning_rate)),
            hierarchy_margin=float(config.get('hierarchy_margin', cls.hierarchy_margin)),
            negative_samples=int(config.get('negative_samples', cls.negative_samples)),
            batch_size=int(config.get('batch_size', cls.batch_size)),
            neighbor_pairs=int(config.get('neighbor_pairs', cls.neighbor_pairs)),
            lam=float(config.get('lambda', cls.lam)),
        )


class EmbeddingTable:
    """
    Per-AS vectors and hierarchy scalars.

    Args:
        asns (list): AS numbers, row order of the arrays
        vectors (np.ndarray): (n, d) proximity vectors
        hierarchy (np.ndarray): (n,) hierarchy positions
        lam (float): Weight of the hierarchy term in role differences
    """

    def __init__(self, asns: Sequence[Asn], vectors: np.ndarray, hierarchy: np.ndarray, lam: float = 1.0):
        self.asns = tuple(int(a) for a in asns)
        self.vectors = np.asarray(vectors, dtype=np.float64).reshape(len(self.asns), -1)
        self.hierarchy = np.asarray(hierarchy, dtype=np.float64).reshape(len(self.asns))
        self.lam = float(lam)
        self.index = {asn: i for i, asn in enumerate(self.asns)}
        if not (np.all(np.isfinite(self.vectors)) and np.all(np.isfinite(self.hierarchy))):
            raise TrainingError("embedding contains non-finite entries")

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, asn) -> bool:
        return asn in self.index

    def __len__(self) -> int:
        return len(self.asns)

    def __eq__(self, other) -> bool:
        return (isinstance(other, EmbeddingTable) and self.asns == other.asns and self.lam == other.lam
                and np.array_equal(self.vectors, other.vectors) and np.array_equal(self.hierarchy, other.hierarchy))

    def __repr__(self):
        return f"EmbeddingTable(n={len(self)}, d={self.d}, lambda={self.lam})"

    def rows(self, path: Iterable[Asn]) -> np.ndarray:
        """Row indices of a path's ASes."""
        try:
            return np.array([self.index[a] for a in path], dtype=np.int64)
        except KeyError as e:
            raise NotFoundError(f"AS{e.args[0]} has no embedding") from e

    def vector(self, asn: Asn) -> np.ndarray:
        return self.vectors[self.rows([asn])[0]]

    def hier(self, asn: Asn) -> float:
        return float(self.hierarchy[self.rows([asn])[0]])

    def scaled(self, factor: float) -> "EmbeddingTable":
        return EmbeddingTable(self.asns, self.vectors * factor, self.hierarchy * factor, self.lam)

    def to_text(self) -> str:
        lines = [f"{self.d} {self.lam!r}"]
        for asn, vec, h in zip(self.asns, self.vectors, self.hierarchy):
            lines.append(" ".join([str(asn)] + [repr(float(x)) for x in vec] + [repr(float(h))]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EmbeddingTable":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ParseError("empty embedding file")
        try:
            d_token, lam_token = lines[0].split()
            d, lam = int(d_token), float(lam_token)
        except ValueError as e:
            raise ParseError(f"bad header: {e}", 1) from e
        asns, vectors, hierarchy = [], [], []
        for line_number, line in enumerate(lines[1:], start=2):
            tokens = line.split()
            if len(tokens) != d + 2:
                raise ParseError(f"expected {d + 2} fields, got {len(tokens)}", line_number)
            try:
                asns.append(int(tokens[0]))
                vectors.append([float(t) for t in tokens[1:-1]])
                hierarchy.append(float(tokens[-1]))
            except ValueError as e:
                raise ParseError(str(e), line_number) from e
        return cls(asns, np.array(vectors).reshape(len(asns), d), np.array(hierarchy), lam)


def _positive_pairs(graph: AsGraph, index: Dict[Asn, int], per_node: int, rng: np.random.Generator) -> np.ndarray:
    """Adjacent pairs plus a sample of pairs sharing a neighbour."""
    pairs = [(index[a], index[b]) for a, b in sorted(graph.edges)]
    for w in sorted(graph.nodes):
        neigh = sorted(graph.neighbors(w))
        if len(neigh) < 2:
            continue
        for _ in range(min(per_node, len(neigh) * (len(neigh) - 1) // 2)):
            a, b = rng.choice(len(neigh), size=2, replace=False)
            pairs.append((index[neigh[a]], index[neigh[b]]))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _sq_dist(emb: torch.Tensor, pairs: torch.Tensor) -> torch.Tensor:
    diff = emb[pairs[:, 0]] - emb[pairs[:, 1]]
    return (diff * diff).sum(dim=1)


def _pair_keys(pairs: torch.Tensor, n: int) -> torch.Tensor:
    """Keys row * n + column of both orientations of each pair."""
    return torch.unique(torch.cat([pairs[:, 0] * n + pairs[:, 1], pairs[:, 1] * n + pairs[:, 0]]))


def _negative_mask(heads: torch.Tensor, tails: torch.Tensor, positive_keys: torch.Tensor, n: int) -> torch.Tensor:
    """Sampled pairs usable as negatives: no self pairs, no positive pairs."""
    return (heads != tails) & ~torch.isin(heads * n + tails, positive_keys)


def train_embedding(graph: AsGraph, params: Optional[EmbeddingParams] = None, seed: int = 0) -> EmbeddingTable:
    """
    Learn role embeddings for every AS of a graph.

    Proximity: adjacent and shared-neighbour pairs are pulled inside unit
    squared distance, random non-adjacent pairs are pushed outside it
    (logistic loss on squared distance). Hierarchy: a hinge loss asks every
    provider to sit at least hierarchy_margin above each customer.

    Args:
        graph (AsGraph): Topology
        params (EmbeddingParams, optional): Hyperparameters
        seed (int): Seed of initialisation, pair sampling and batching

    Returns:
        EmbeddingTable

    Raises:
        TrainingError: Empty graph, d < 2 or a non-finite final loss
    """
    params = params or EmbeddingParams()
    if len(graph) == 0:
        raise TrainingError("cannot embed an empty graph")
    if params.dimension < 2:
        raise TrainingError(f"embedding dimension must be >= 2, got {params.dimension}")

    asns = sorted(graph.nodes)
    index = {asn: i for i, asn in enumerate(asns)}
    n = len(asns)
    rng = np.random.default_rng(seed)
    gen = torch.Generator().manual_seed(seed)

    positives = torch.from_numpy(_positive_pairs(graph, index, params.neighbor_pairs, rng))
    p2c = torch.tensor([(index[p], index[c]) for (p, c), rel in sorted(graph.edges.items())
                        if rel is Relationship.PROVIDER_TO_CUSTOMER], dtype=torch.int64).reshape(-1, 2)
    positive_keys = _pair_keys(positives, n)

    emb = (torch.randn((n, params.dimension), generator=gen, dtype=torch.float64) * 0.1).requires_grad_()
    hier = (torch.randn((n,), generator=gen, dtype=torch.float64) * 0.1).requires_grad_()
    optimizer = torch.optim.Adam([emb, hier], lr=params.learning_rate)

    loss = torch.zeros((), dtype=torch.float64)
    n_pos = len(positives)
    for epoch in range(params.epochs):
        order = torch.randperm(n_pos, generator=gen) if n_pos else torch.zeros(1, dtype=torch.int64)
        n_batches = max(1, math.ceil(n_pos / params.batch_size))
        for b in range(n_batches):
            optimizer.zero_grad()
            loss = torch.zeros((), dtype=torch.float64)
            if n_pos:
                batch = positives[order[b * params.batch_size:(b + 1) * params.batch_size]]
                loss = loss + F.softplus(_sq_dist(emb, batch) - 1.0).mean()
                heads = batch[:, 0].repeat_interleave(params.negative_samples)
                tails = torch.randint(0, n, (len(heads),), generator=gen)
                mask = _negative_mask(heads, tails, positive_keys, n)
                if mask.any():
                    negatives = torch.stack([heads[mask], tails[mask]], dim=1)
                    loss = loss + F.softplus(1.0 - _sq_dist(emb, negatives)).mean()
            if len(p2c):
                loss = loss + F.relu(params.hierarchy_margin + hier[p2c[:, 1]] - hier[p2c[:, 0]]).mean()
            if loss.requires_grad:
                loss.backward()
                optimizer.step()
        if epoch % 10 == 0 or epoch == params.epochs - 1:
            logger.debug("embedding epoch %d: loss %.5f", epoch, float(loss))

    if not math.isfinite(float(loss)):
        raise TrainingError(f"embedding training diverged (loss {float(loss)})")
    logger.info("trained %d-dimensional embedding for %d ASes, final loss %.4f", params.dimension, n, float(loss))
    return EmbeddingTable(asns, emb.detach().numpy().copy(), hier.detach().numpy().copy(), params.lam)


def hierarchy_agreement(table: EmbeddingTable, graph: AsGraph) -> float:
    """Share of provider-customer edges with hierarchy(provider) > hierarchy(customer)."""
    edges = [(p, c) for (p, c), rel in graph.edges.items() if rel is Relationship.PROVIDER_TO_CUSTOMER]
    if not edges:
        return 1.0
    return sum(table.hier(p) > table.hier(c) for p, c in edges) / len(edges)
