"""
Configuration file for the BGP monitor poisoning simulator
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Project paths
PROJECT_ROOT = Path(__file__).parent
DATA_DIR = PROJECT_ROOT / "data"
MODELS_DIR = PROJECT_ROOT / "models" / "checkpoints"
RESULTS_DIR = Path(os.environ.get("POISONSIM_RESULTS_DIR", PROJECT_ROOT / "results"))
DOCS_DIR = PROJECT_ROOT / "docs"
TESTS_DIR = PROJECT_ROOT / "tests"

# Synthetic topology (desk scale)
TOPOLOGY_CONFIG = {
    'tier1': 8,
    'tier2': 200,
    'stub': 1792,
    'tier2_providers': (1, 3),
    'stub_providers': (1, 2),
    'tier2_peers': 4,  # mean peer links per tier-2 AS
    'countries': ['US', 'DE', 'FR', 'GB', 'NL', 'BR', 'JP', 'IN', 'ZA', 'AU', 'RU', 'SG'],
    'irr_fraction': 0.4,
    'prefix_base': '16.0.0.0',
    'prefix_length': 20,
}

# Propagation and observation
ROUTING_CONFIG = {
    'n_monitors': 60,
    'rov_fraction': 0.0,
    'poison_roa_mode': 'none',  # 'none' -> NotFound, 'create-roa' -> Valid
    'announcement_lifetime_days': 300,
}

# DFOH-like detector
DFOH_CONFIG = {
    'window_days': 300,
    'quarantine_days': 30,
    'n_trees': 50,
    'max_depth': 12,
    'bootstrap_fraction': 1.0,
    'flag_threshold': 0.5,
    'n_per_class': 500,
    'cv_folds': 5,
    'ablate': [],
}

# BEAM-like detector
BEAM_CONFIG = {
    'dimension': 64,
    'epochs': 50,
    'learning_rate': 0.05,
    'hierarchy_margin': 0.1,
    'negative_samples': 5,
    'batch_size': 1024,
    'lambda': 1.0,
    'window_seconds': 3600,
    'k': 3.0,
    'include_flagged': False,
    'background_changes': 600,
}

# Adversary
ATTACK_CONFIG = {
    'budget': 5,
    'allow_transit_augmentation': True,
    'wait_days': 30,
    'hijack_delay_days': 0,
    'weights': {'country': 3.0, 'ixp': 2.0, 'degree': 1.0, 'victim_neighbor': 3.0},
    'lookahead': 8,
    'epsilon': 0.05,
}

# Route oscillation amplification
OSCILLATION_CONFIG = {
    'mean': 6.43,
    'std': 17.79,
    'max_multiplier': 500,
    'shape': 'lognormal',
}

# Private monitor sweep
MONITOR_CONFIG = {
    'm_grid': [1, 5, 10, 25, 50, 100],
    'trials': 100,
}

# Campaign orchestration
HARNESS_CONFIG = {
    'seed': 1,
    'jobs': 1,
    'n_attackers': 20,
    'victims': 'sample-50',
    'beam_attackers': 5,
    'n_distinct': [1, 50],
}

# Logging Configuration
LOGGING_CONFIG = {
    'level': os.environ.get('POISONSIM_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'log_file': None,
}
