"""Degrees of freedom of Wyner linear interference networks with block link erasures."""

from .analysis import CurveId, eval_curve, find_crossover, limit_ratio, thm5_components
from .assignment import (MessageAssignment, assignment_from_load_vector, assignment_from_string,
                         classify_string, comp_assignment, connected_fraction, load_vector)
from .engine import (DofEstimate, ExperimentConfig, exact_block_expectation, exact_small_k,
                     interior_marginal, monte_carlo)
from .oracle import oracle_bruteforce_m1, oracle_m1
from .schedulers import ScheduleOutcome, schedule, validate_outcome
from .structure import SubnetworkRange, split_subnetworks
from .topology import ErasureModel, LinkRealization, enumerate_realizations, realization_probability, sample_realization

__version__ = "0.1.0"
