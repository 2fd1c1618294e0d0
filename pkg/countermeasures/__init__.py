"""
Private-monitor countermeasure evaluation.
"""

from countermeasures.monitors import (
    MonitorDeployment,
    Strategy,
    detection_rate,
    select_monitors_best_case,
    select_monitors_random,
    sweep_detection,
)

__all__ = [
    'MonitorDeployment',
    'Strategy',
    'detection_rate',
    'select_monitors_best_case',
    'select_monitors_random',
    'sweep_detection',
]
