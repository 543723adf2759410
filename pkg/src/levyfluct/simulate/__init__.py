"""Two-sided Skorokhod reflection simulator and Monte Carlo oracles."""

from ._backend import backend_name
from .paths import (
    MAX_JUMPS,
    MAX_STEPS,
    InverseLocalTimeEstimate,
    McEstimate,
    PassageRecord,
    ReflectedPath,
    StopRule,
    estimate_first_jump_transform,
    estimate_inverse_local_time_process,
    estimate_minimum_transform,
    estimate_passage_functional,
    estimate_two_sided_exit,
    one_sided_lower_reflection,
    simulate_euler,
    simulate_event_exact,
)
from .rng import path_generator

__all__ = [
    "backend_name",
    "path_generator",
    "MAX_STEPS",
    "MAX_JUMPS",
    "StopRule",
    "PassageRecord",
    "ReflectedPath",
    "McEstimate",
    "InverseLocalTimeEstimate",
    "simulate_event_exact",
    "simulate_euler",
    "one_sided_lower_reflection",
    "estimate_passage_functional",
    "estimate_two_sided_exit",
    "estimate_inverse_local_time_process",
    "estimate_minimum_transform",
    "estimate_first_jump_transform",
]
