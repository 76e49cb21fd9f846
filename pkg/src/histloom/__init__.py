"""Near-linear-time semi-agnostic learning of variable-width histograms."""

from .atoms import detect_heavy, learn_with_atoms
from .density import (
    AtomicMixture,
    BinnedEmpirical,
    ContractViolation,
    DiscreteDistribution,
    EmpiricalSample,
    Interval,
    PiecewiseDensity,
    alpha,
    discretize,
    flatten,
    l1_distance,
    mass_on,
    sample,
    tv_distance,
)
from .learner import LearnerConfig, MergeState, learn_wb, learner_trace, merge_pass
from .lowerbound import HardInstance, distinguishing_experiment, sample_hard_instance
from .oracles import OptKResult, a_ell_distance, opt_k_exact
from .partition import IntervalPartition, approx_equal_partition, partition_for_learner
from .selection import CandidatePool, agnostic_learn, scheffe_select
from .sources import ArraySource, DistributionSource, FilteredSource, SampleExhausted, derive_seed
from .targets import TargetSpec, generate_target

__all__ = [
    "AtomicMixture",
    "ArraySource",
    "BinnedEmpirical",
    "CandidatePool",
    "ContractViolation",
    "DiscreteDistribution",
    "DistributionSource",
    "EmpiricalSample",
    "FilteredSource",
    "HardInstance",
    "Interval",
    "IntervalPartition",
    "LearnerConfig",
    "MergeState",
    "OptKResult",
    "PiecewiseDensity",
    "SampleExhausted",
    "TargetSpec",
    "a_ell_distance",
    "agnostic_learn",
    "alpha",
    "approx_equal_partition",
    "derive_seed",
    "detect_heavy",
    "discretize",
    "distinguishing_experiment",
    "flatten",
    "generate_target",
    "l1_distance",
    "learn_wb",
    "learn_with_atoms",
    "learner_trace",
    "mass_on",
    "merge_pass",
    "opt_k_exact",
    "partition_for_learner",
    "sample",
    "sample_hard_instance",
    "scheffe_select",
    "tv_distance",
]

__version__ = "0.1.0"
