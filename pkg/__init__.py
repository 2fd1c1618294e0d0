"""
Package initialization file for the BGP monitor poisoning simulator
"""

__version__ = "1.0.0"
__author__ = "BGP Monitor Poisoning Team"
__description__ = "Simulation of poisoning attacks on BGP hijack detectors and their countermeasures"

__all__ = ['__version__', '__author__', '__description__']
