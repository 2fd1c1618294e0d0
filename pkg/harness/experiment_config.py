"""
Experiment configuration: a strict JSON document resolved against the
defaults in config.py.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import config as defaults
from exceptions import ConfigError

logger = logging.getLogger(__name__)

# JSON keys that are not valid Python field names
ALIASES = {'lambda': 'lam'}


def _build(cls, data: Optional[Dict], section: str):
    """Instantiate a config dataclass, rejecting unknown keys."""
    data = {ALIASES.get(key, key): value for key, value in (data or {}).items()}
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {unknown}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{section}' section: {e}") from e


@dataclass
class TopologyConfig:
    source: str = 'synthetic'
    relationships_file: Optional[str] = None
    metadata_file: Optional[str] = None
    irr_file: Optional[str] = None
    tier1: int = defaults.TOPOLOGY_CONFIG['tier1']
    tier2: int = defaults.TOPOLOGY_CONFIG['tier2']
    stub: int = defaults.TOPOLOGY_CONFIG['stub']
    tier2_providers: Tuple[int, int] = defaults.TOPOLOGY_CONFIG['tier2_providers']
    stub_providers: Tuple[int, int] = defaults.TOPOLOGY_CONFIG['stub_providers']
    tier2_peers: float = defaults.TOPOLOGY_CONFIG['tier2_peers']
    countries: List[str] = field(default_factory=lambda: list(defaults.TOPOLOGY_CONFIG['countries']))
    irr_fraction: float = defaults.TOPOLOGY_CONFIG['irr_fraction']
    prefix_base: str = defaults.TOPOLOGY_CONFIG['prefix_base']
    prefix_length: int = defaults.TOPOLOGY_CONFIG['prefix_length']

    def __post_init__(self):
        if self.source not in ('synthetic', 'files'):
            raise ConfigError(f"topology.source must be 'synthetic' or 'files', got '{self.source}'")
        if self.source == 'files' and not self.relationships_file:
            raise ConfigError("topology.source 'files' needs relationships_file")
        self.tier2_providers = tuple(self.tier2_providers)
        self.stub_providers = tuple(self.stub_providers)
        if not 0 <= self.irr_fraction <= 1:
            raise ConfigError(f"topology.irr_fraction must be in [0, 1], got {self.irr_fraction}")


@dataclass
class RoutingConfig:
    n_monitors: int = defaults.ROUTING_CONFIG['n_monitors']
    rov_fraction: float = defaults.ROUTING_CONFIG['rov_fraction']
    poison_roa_mode: str = defaults.ROUTING_CONFIG['poison_roa_mode']
    announcement_lifetime_days: int = defaults.ROUTING_CONFIG['announcement_lifetime_days']

    def __post_init__(self):
        if self.n_monitors < 1:
            raise ConfigError("routing.n_monitors must be >= 1")
        if not 0 <= self.rov_fraction <= 1:
            raise ConfigError(f"routing.rov_fraction must be in [0, 1], got {self.rov_fraction}")
        if self.announcement_lifetime_days < 1:
            raise ConfigError("routing.announcement_lifetime_days must be >= 1")
        if self.poison_roa_mode not in ('none', 'create-roa'):
            raise ConfigError(f"routing.poison_roa_mode must be 'none' or 'create-roa', got '{self.poison_roa_mode}'")


@dataclass
class DfohConfig:
    window_days: int = defaults.DFOH_CONFIG['window_days']
    quarantine_days: int = defaults.DFOH_CONFIG['quarantine_days']
    n_trees: int = defaults.DFOH_CONFIG['n_trees']
    max_depth: int = defaults.DFOH_CONFIG['max_depth']
    bootstrap_fraction: float = defaults.DFOH_CONFIG['bootstrap_fraction']
    flag_threshold: float = defaults.DFOH_CONFIG['flag_threshold']
    n_per_class: int = defaults.DFOH_CONFIG['n_per_class']
    cv_folds: int = defaults.DFOH_CONFIG['cv_folds']
    ablate: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 0 or self.n_per_class < 1:
            raise ConfigError("dfoh.n_trees, dfoh.max_depth and dfoh.n_per_class must be positive")
        unknown = set(self.ablate) - {'topological', 'peering', 'aspath', 'bidirectionality'}
        if unknown:
            raise ConfigError(f"dfoh.ablate has unknown categories {sorted(unknown)}")


@dataclass
class BeamConfig:
    dimension: int = defaults.BEAM_CONFIG['dimension']
    epochs: int = defaults.BEAM_CONFIG['epochs']
    learning_rate: float = defaults.BEAM_CONFIG['learning_rate']
    hierarchy_margin: float = defaults.BEAM_CONFIG['hierarchy_margin']
    negative_samples: int = defaults.BEAM_CONFIG['negative_samples']
    batch_size: int = defaults.BEAM_CONFIG['batch_size']
    lam: float = defaults.BEAM_CONFIG['lambda']
    window_seconds: int = defaults.BEAM_CONFIG['window_seconds']
    k: float = defaults.BEAM_CONFIG['k']
    include_flagged: bool = defaults.BEAM_CONFIG['include_flagged']
    background_changes: int = defaults.BEAM_CONFIG['background_changes']

    def __post_init__(self):
        if self.dimension < 2:
            raise ConfigError("beam.dimension must be >= 2")
        if self.window_seconds < 1:
            raise ConfigError("beam.window_seconds must be >= 1")


@dataclass
class AttackConfig:
    budget: int = defaults.ATTACK_CONFIG['budget']
    allow_transit_augmentation: bool = defaults.ATTACK_CONFIG['allow_transit_augmentation']
    wait_days: int = defaults.ATTACK_CONFIG['wait_days']
    hijack_delay_days: int = defaults.ATTACK_CONFIG['hijack_delay_days']
    weights: Dict[str, float] = field(default_factory=lambda: dict(defaults.ATTACK_CONFIG['weights']))
    lookahead: int = defaults.ATTACK_CONFIG['lookahead']
    epsilon: float = defaults.ATTACK_CONFIG['epsilon']

    def __post_init__(self):
        if self.budget < 0:
            raise ConfigError("attack.budget must be >= 0")
        if self.allow_transit_augmentation and self.wait_days < 30:
            raise ConfigError("attack.wait_days must be >= 30 when transit augmentation is allowed")
        if self.hijack_delay_days < 0:
            raise ConfigError("attack.hijack_delay_days must be >= 0")
        if not 0 < self.epsilon < 1:
            raise ConfigError("attack.epsilon must be in (0, 1)")
        unknown = set(self.weights) - set(defaults.ATTACK_CONFIG['weights'])
        if unknown:
            raise ConfigError(f"attack.weights has unknown keys {sorted(unknown)}")


@dataclass
class OscillationConfig:
    mean: float = defaults.OSCILLATION_CONFIG['mean']
    std: float = defaults.OSCILLATION_CONFIG['std']
    max_multiplier: int = defaults.OSCILLATION_CONFIG['max_multiplier']
    shape: str = defaults.OSCILLATION_CONFIG['shape']


@dataclass
class MonitorConfig:
    m_grid: List[int] = field(default_factory=lambda: list(defaults.MONITOR_CONFIG['m_grid']))
    trials: int = defaults.MONITOR_CONFIG['trials']

    def __post_init__(self):
        if any(m < 1 for m in self.m_grid):
            raise ConfigError("monitors.m_grid entries must be >= 1")
        self.m_grid = sorted(set(int(m) for m in self.m_grid))


@dataclass
class CampaignConfig:
    n_attackers: int = defaults.HARNESS_CONFIG['n_attackers']
    victims: str = defaults.HARNESS_CONFIG['victims']
    beam_attackers: int = defaults.HARNESS_CONFIG['beam_attackers']
    n_distinct: List[int] = field(default_factory=lambda: list(defaults.HARNESS_CONFIG['n_distinct']))

    def __post_init__(self):
        if self.n_attackers < 0 or self.beam_attackers < 0:
            raise ConfigError("campaign attacker counts must be >= 0")
        self.victim_sample()
        if len(self.n_distinct) == 2 and self.n_distinct[0] <= self.n_distinct[1]:
            self.n_distinct = [int(self.n_distinct[0]), int(self.n_distinct[1])]
        elif len(self.n_distinct) == 1:
            self.n_distinct = [int(self.n_distinct[0])] * 2
        else:
            raise ConfigError("campaign.n_distinct must be [low, high] with low <= high")

    def victim_sample(self) -> Optional[int]:
        """None for 'all', n for 'sample-n'."""
        if self.victims == 'all':
            return None
        prefix, _, count = self.victims.partition('-')
        if prefix != 'sample' or not count.isdigit():
            raise ConfigError(f"campaign.victims must be 'all' or 'sample-<n>', got '{self.victims}'")
        return int(count)

    @property
    def n_distinct_range(self) -> List[int]:
        return list(range(self.n_distinct[0], self.n_distinct[1] + 1))


SECTIONS = {
    'topology': TopologyConfig,
    'routing': RoutingConfig,
    'dfoh': DfohConfig,
    'beam': BeamConfig,
    'attack': AttackConfig,
    'oscillation': OscillationConfig,
    'monitors': MonitorConfig,
    'campaign': CampaignConfig,
}

NON_SEMANTIC = ('out', 'jobs')


@dataclass
class ExperimentConfig:
    seed: int
    jobs: int = defaults.HARNESS_CONFIG['jobs']
    out: str = str(defaults.RESULTS_DIR)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    dfoh: DfohConfig = field(default_factory=DfohConfig)
    beam: BeamConfig = field(default_factory=BeamConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    oscillation: OscillationConfig = field(default_factory=OscillationConfig)
    monitors: MonitorConfig = field(default_factory=MonitorConfig)
    campaign: CampaignConfig = field(default_factory=CampaignConfig)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        unknown = sorted(set(data) - set(SECTIONS) - {'seed', 'jobs', 'out'})
        if unknown:
            raise ConfigError(f"unknown top-level keys: {unknown}")
        if 'seed' not in data:
            raise ConfigError("experiment config needs a 'seed'")
        try:
            seed = int(data['seed'])
            jobs = int(data.get('jobs', defaults.HARNESS_CONFIG['jobs']))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"seed and jobs must be integers: {e}") from e
        if jobs < 1:
            raise ConfigError("jobs must be >= 1")
        sections = {name: _build(section_cls, data.get(name), name) for name, section_cls in SECTIONS.items()}
        return cls(seed=seed, jobs=jobs, out=str(data.get('out', defaults.RESULTS_DIR)), **sections)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON, ignoring the output directory and job count."""
        semantic = {key: value for key, value in self.to_dict().items() if key not in NON_SEMANTIC}
        canonical = json.dumps(semantic, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None,
                       jobs: Optional[int] = None) -> "ExperimentConfig":
        data = self.to_dict()
        if seed is not None:
            data['seed'] = seed
        if out is not None:
            data['out'] = out
        if jobs is not None:
            data['jobs'] = jobs
        return ExperimentConfig.from_dict(data)


def load_config(source: Union[str, Path, Dict, None] = None, seed: Optional[int] = None) -> ExperimentConfig:
    """
    Read an experiment config from a JSON file or a dictionary.

    Args:
        source: Path, parsed dictionary, or None for pure defaults
        seed (int, optional): Overrides the document seed

    Raises:
        ConfigError: Unreadable file, invalid JSON, missing seed, unknown keys
            or bad values
    """
    if source is None:
        data: Dict[str, Any] = {}
    elif isinstance(source, dict):
        data = dict(source)
    else:
        try:
            data = json.loads(Path(source).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {source}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {source} is not valid JSON: {e}") from e
    if seed is not None:
        data['seed'] = seed
    config = ExperimentConfig.from_dict(data)
    logger.debug("loaded config %s (hash %s)", source, config.config_hash()[:12])
    return config
