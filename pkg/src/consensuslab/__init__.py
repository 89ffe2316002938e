"""Simulation and verification toolkit for pull-based consensus dynamics
(Voter, 2-Choices, h-majority) on the complete graph."""

from .core import (
    Configuration,
    InvalidConfiguration,
    MassMismatch,
    ProbabilityVector,
    StopCondition,
    canonicalize,
    majorizes,
    prefix_functional,
)
from .rules import (
    UpdateRule,
    expected_fraction_after_step,
    h_majority_rule,
    process_function,
    process_function_exact,
    step_ac,
    step_rule,
    step_two_choices,
    two_choices_rule,
    voter_rule,
)
from .sampler import RngStream, sample_multinomial, sample_uniform_node

__version__ = "0.1.0"
