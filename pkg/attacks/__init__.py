"""
Adversarial attacks: knowledge-base poisoning and threshold pollution.
"""

from attacks.dfoh_poisoning import (
    augment_transit,
    execute_dfoh_attack,
    extend_paths,
    plan_dfoh_poisoning,
    poison_candidates,
    rank_candidates,
)
from attacks.model import AttackResult, AttackSpec, PlannerWeights, PoisonLink, PoisonPlan, SimContext
from attacks.oscillation import OscillationModel
from attacks.threshold_pollution import (
    PollutionAnnouncement,
    PollutionPlan,
    PollutionResult,
    amplify,
    estimate_beam_threshold,
    evaluate_pollution,
    hijack_candidates,
    plan_threshold_pollution,
)

__all__ = [
    'AttackResult',
    'AttackSpec',
    'OscillationModel',
    'PlannerWeights',
    'PoisonLink',
    'PoisonPlan',
    'PollutionAnnouncement',
    'PollutionPlan',
    'PollutionResult',
    'SimContext',
    'amplify',
    'augment_transit',
    'estimate_beam_threshold',
    'evaluate_pollution',
    'execute_dfoh_attack',
    'extend_paths',
    'hijack_candidates',
    'plan_dfoh_poisoning',
    'plan_threshold_pollution',
    'poison_candidates',
    'rank_candidates',
]
