"""
The simulated Internet an experiment runs in.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple

from attacks.model import SimContext
from exceptions import ConfigError
from harness.experiment_config import ExperimentConfig
from harness.seeds import derive_seed, stage_rng
from routing_sim.hijacks import RoaMode
from routing_sim.observation import observe_origins
from routing_sim.routes import RoaTable, RouteEvent
from topology.as_graph import AsGraph, Asn, Link
from topology.metadata import Metadata, parse_metadata
from topology.prefixes import Prefix, allocate_prefixes
from topology.relationships import parse_irr_links, parse_relationships
from topology.synthetic import (
    TopologyParams,
    generate_irr_links,
    generate_synthetic_metadata,
    generate_synthetic_topology,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class World:
    """Ground-truth topology, public datasets and the day-0 monitor view."""

    graph: AsGraph
    metadata: Metadata
    irr_links: FrozenSet[Link]
    prefixes: Dict[Asn, Prefix]
    monitors: Tuple[Asn, ...]
    rov_ases: FrozenSet[Asn]
    roa_mode: RoaMode
    events: Tuple[RouteEvent, ...]

    @property
    def context(self) -> SimContext:
        return SimContext(self.graph, self.monitors, self.prefixes, RoaTable(), self.rov_ases, self.roa_mode)

    def observed_origins(self) -> List[Asn]:
        return sorted({event.announcement.origin for event in self.events})


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


def load_topology(config: ExperimentConfig) -> Tuple[AsGraph, Metadata, FrozenSet[Link]]:
    """
    Topology, metadata and IRR links from files or the synthetic generator.

    In 'files' mode a missing metadata file falls back to synthetic metadata
    over the loaded graph and a missing IRR file means no registered links.
    """
    topo = config.topology
    seed = config.seed
    if topo.source == 'files':
        graph = parse_relationships(_read(topo.relationships_file))
        if topo.metadata_file:
            metadata = parse_metadata(_read(topo.metadata_file))
        else:
            metadata = generate_synthetic_metadata(graph, derive_seed(seed, 'metadata'), topo.countries)
        irr = parse_irr_links(_read(topo.irr_file)) if topo.irr_file else set()
    else:
        params = TopologyParams.from_dict({
            'tier1': topo.tier1,
            'tier2': topo.tier2,
            'stub': topo.stub,
            'tier2_providers': topo.tier2_providers,
            'stub_providers': topo.stub_providers,
            'tier2_peers': topo.tier2_peers,
        })
        graph = generate_synthetic_topology(params, derive_seed(seed, 'topology'))
        metadata = generate_synthetic_metadata(graph, derive_seed(seed, 'metadata'), topo.countries)
        irr = generate_irr_links(graph, topo.irr_fraction, derive_seed(seed, 'irr'))
    return graph, metadata, frozenset(irr)


def build_world(config: ExperimentConfig, graph: Optional[AsGraph] = None) -> World:
    """
    Build the world of an experiment.

    Args:
        config (ExperimentConfig): Resolved experiment config
        graph (AsGraph, optional): Use this topology instead of loading one;
            metadata and IRR links are then synthesised for it

    Returns:
        World
    """
    if graph is None:
        graph, metadata, irr = load_topology(config)
    else:
        metadata = generate_synthetic_metadata(graph, derive_seed(config.seed, 'metadata'), config.topology.countries)
        irr = frozenset(generate_irr_links(graph, config.topology.irr_fraction, derive_seed(config.seed, 'irr')))

    nodes = sorted(graph.nodes)
    prefixes = allocate_prefixes(nodes, config.topology.prefix_base, config.topology.prefix_length)

    rng = stage_rng(config.seed, 'monitors')
    count = min(config.routing.n_monitors, len(nodes))
    monitors = tuple(sorted(nodes[i] for i in rng.choice(len(nodes), size=count, replace=False)))

    rng = stage_rng(config.seed, 'rov')
    rov = frozenset(asn for asn in nodes if rng.random() < config.routing.rov_fraction)

    events = tuple(observe_origins(graph, prefixes, monitors, 0, RoaTable(), rov))
    logger.info("world: %d ASes, %d links, %d monitors, %d day-0 routes",
                len(nodes), len(graph.edges), len(monitors), len(events))
    return World(graph, metadata, irr, prefixes, monitors, rov, RoaMode(config.routing.poison_roa_mode), events)
