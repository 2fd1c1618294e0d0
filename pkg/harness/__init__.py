"""
Experiment orchestration: configuration, seeded campaigns, result files and the CLI.
"""

from harness.campaigns import (
    run_beam_campaign,
    run_beam_training,
    run_dfoh_campaign,
    run_dfoh_training,
    run_gen_topology,
    run_monitor_sweep,
    train_beam_embedding,
    train_dfoh_detector,
)
from harness.experiment_config import ExperimentConfig, load_config
from harness.results import ResultBundle, summarize
from harness.seeds import derive_seed, stage_rng
from harness.world import World, build_world

__all__ = [
    'ExperimentConfig',
    'ResultBundle',
    'World',
    'build_world',
    'derive_seed',
    'load_config',
    'run_beam_campaign',
    'run_beam_training',
    'run_dfoh_campaign',
    'run_dfoh_training',
    'run_gen_topology',
    'run_monitor_sweep',
    'stage_rng',
    'summarize',
    'train_beam_embedding',
    'train_dfoh_detector',
]
