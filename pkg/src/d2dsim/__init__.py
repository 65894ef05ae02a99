"""Single-cell LTE simulator with joint D2D mode selection and PF scheduling."""

from .config import SimConfig, load_config
from .model import Arc, Mode, NetworkGraph, build_graph, validate_states
from .selector import (ModeAssignment, SelectionProblem, brute_force_solve, check_feasibility,
                       exact_solve, greedy_solve)
from .simulator import run

__all__ = [
    "Arc", "Mode", "ModeAssignment", "NetworkGraph", "SelectionProblem", "SimConfig",
    "brute_force_solve", "build_graph", "check_feasibility", "exact_solve", "greedy_solve",
    "load_config", "run", "validate_states",
]

__version__ = "0.1.0"
