"""
Attack inputs, plans and results.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from exceptions import ConfigError, InvalidScenarioError
from routing_sim.hijacks import RoaMode
from routing_sim.routes import RoaTable
from topology.as_graph import Asn, AsGraph, Link
from topology.prefixes import Prefix

MIN_WAIT_DAYS = 30


@dataclass(frozen=True)
class AttackSpec:
    """
    One attacker / victim pair.

    Args:
        attacker (int): Hijacking AS
        victim (int): AS whose prefix is hijacked
        parent_prefix (Prefix): Prefix owned by the attacker, source of
            poisoning sub-prefixes
        budget (int): Maximum number of poison links
        allow_transit_augmentation (bool): May buy a new provider when the
            direct candidates run out
        wait_days (int): Days waited after a new provider link, at least 30
        hijack_delay_days (int): Days between the last poison announcement
            and the hijack
        announcement_lifetime_days (int, optional): Days each poison
            announcement stays visible; None keeps them up until the hijack
    """

    attacker: Asn
    victim: Asn
    parent_prefix: Prefix
    budget: int = 5
    allow_transit_augmentation: bool = False
    wait_days: int = MIN_WAIT_DAYS
    hijack_delay_days: int = 0
    announcement_lifetime_days: Optional[int] = None

    def __post_init__(self):
        if self.attacker == self.victim:
            raise InvalidScenarioError(f"attacker and victim are both AS{self.victim}")
        if self.budget < 0:
            raise InvalidScenarioError(f"budget must be >= 0, got {self.budget}")
        if self.hijack_delay_days < 0:
            raise InvalidScenarioError(f"hijack_delay_days must be >= 0, got {self.hijack_delay_days}")
        if self.announcement_lifetime_days is not None and self.announcement_lifetime_days < 1:
            raise InvalidScenarioError(
                f"announcement_lifetime_days must be >= 1, got {self.announcement_lifetime_days}")
        if self.allow_transit_augmentation and self.wait_days < MIN_WAIT_DAYS:
            raise InvalidScenarioError(
                f"transit augmentation needs wait_days >= {MIN_WAIT_DAYS}, got {self.wait_days}")

    @property
    def hijack_link(self) -> Link:
        return self.attacker, self.victim


@dataclass(frozen=True)
class PlannerWeights:
    country: float = 3.0
    ixp: float = 2.0
    degree: float = 1.0
    victim_neighbor: float = 3.0

    @classmethod
    def from_dict(cls, config: Dict) -> "PlannerWeights":
        unknown = set(config) - {'country', 'ixp', 'degree', 'victim_neighbor'}
        if unknown:
            raise ConfigError(f"unknown planner weights: {sorted(unknown)}")
        return cls(**{key: float(value) for key, value in config.items()})


@dataclass(frozen=True)
class PoisonLink:
    announcer: Asn
    forged_origin: Asn
    sub_prefix: Prefix

    @property
    def link(self) -> Link:
        return self.announcer, self.forged_origin


@dataclass(frozen=True)
class PoisonPlan:
    poison_links: Tuple[PoisonLink, ...] = ()
    predicted_evasion: bool = False
    suspicion_before: float = 1.0
    predicted_suspicion: float = 1.0
    augmented_provider: Optional[Asn] = None

    @property
    def forged_origins(self) -> Tuple[Asn, ...]:
        return tuple(p.forged_origin for p in self.poison_links)


@dataclass(frozen=True)
class SimContext:
    """Ground-truth world the attacks run in."""

    graph: AsGraph
    monitors: Tuple[Asn, ...]
    prefixes: Dict[Asn, Prefix]
    roas: RoaTable = field(default_factory=RoaTable)
    rov_ases: frozenset = frozenset()
    roa_mode: RoaMode = RoaMode.NONE


@dataclass(frozen=True)
class AttackResult:
    attacker: Asn
    victim: Asn
    evaded: bool
    links_used: int
    suspicion_before: float
    suspicion_after: float
    attacker_share: float = 0.0
    poison_flagged: int = 0
    poison_links: Tuple[Link, ...] = ()

    def to_row(self) -> Dict:
        return {
            'attacker': self.attacker,
            'victim': self.victim,
            'evaded': self.evaded,
            'links_used': self.links_used,
            'suspicion_before': self.suspicion_before,
            'suspicion_after': self.suspicion_after,
        }
