"""Covert backscatter uplink with a pinching-antenna transmitter.

Link budgets, eavesdropper energy-detection analysis under noise/location/CSI
uncertainty, the alternating power/position rate optimizer and brute-force
oracles that check every closed form.
"""
from .channel import LinkBudget, PowerConfig, RfConstants, backscatter_budget
from .detection import DetectionReport, EveUncertainty, NoiseUncertainty
from .geometry import NodeLayout, Room, Scenario, WaveguidePair
from .optimizer import (
    Binding,
    CovertnessSpec,
    ReliabilitySpec,
    SolveResult,
    System,
    solve_ao,
    solve_baseline,
)

__all__ = [
    "Binding",
    "CovertnessSpec",
    "DetectionReport",
    "EveUncertainty",
    "LinkBudget",
    "NodeLayout",
    "NoiseUncertainty",
    "PowerConfig",
    "ReliabilitySpec",
    "RfConstants",
    "Room",
    "Scenario",
    "SolveResult",
    "System",
    "WaveguidePair",
    "backscatter_budget",
    "solve_ao",
    "solve_baseline",
]

__version__ = "0.1.0"
