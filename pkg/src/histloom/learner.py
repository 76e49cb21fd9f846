"""Iterative pairwise merging with freezing: the near-linear histogram learner.

The loop state is a partition of [0, 1) plus a frozen flag per interval.  Each
pass freezes pairs whose merge cost on the empirical distribution exceeds the
threshold, then merges the remaining unfrozen intervals two by two.  The
output is the empirical distribution flattened on the final partition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .density import BinnedEmpirical, ContractViolation, Interval, PiecewiseDensity, flatten, merge_cost
from .partition import (
    C0,
    IntervalPartition,
    cuts_from_sorted,
    learner_kappa,
    partition_for_learner,
    partition_sample_size,
)
from .sources import SampleSource

C1 = 8
C2 = 64


@dataclass(frozen=True)
class LearnerConfig:
    """Parameters of one learner run.

    ``m`` and ``m0`` override the default sample budgets for the main sample
    and the partitioning sample.  Randomness lives in the sample source.
    """

    k: int
    eps: float
    c0: float = C0
    c1: float = C1
    c2: float = C2
    m: Optional[int] = None
    m0: Optional[int] = None
    merge_threshold: Optional[float] = None

    def __post_init__(self):
        if self.k < 1:
            raise ContractViolation("k must be at least 1")
        if not 0.0 < self.eps < 1.0:
            raise ContractViolation("eps must lie in (0, 1)")
        if self.m is not None and self.m < 1:
            raise ContractViolation("m must be at least 1")
        if self.m0 is not None and self.m0 < 1:
            raise ContractViolation("m0 must be at least 1")

    @property
    def eps_prime(self) -> float:
        return self.eps / math.log2(1.0 / self.eps)

    @property
    def iterations(self) -> int:
        return max(1, math.ceil(math.log2(1.0 / self.eps_prime)))

    @property
    def threshold(self) -> float:
        if self.merge_threshold is not None:
            return self.merge_threshold
        return self.eps_prime / (2 * self.k)

    @property
    def kappa(self) -> float:
        return learner_kappa(self.k, self.eps_prime)

    @property
    def sample_size(self) -> int:
        if self.m is not None:
            return self.m
        r = self.k / self.eps_prime
        return math.ceil(self.c1 * r / self.eps_prime * math.log(r))

    @property
    def partition_size(self) -> int:
        if self.m0 is not None:
            return self.m0
        return partition_sample_size(self.kappa, self.c0)

    @property
    def draw_budget(self) -> int:
        return self.sample_size + self.partition_size

    @property
    def piece_bound(self) -> float:
        return self.c2 * self.k * math.log2(1.0 / self.eps) ** 2


@dataclass(frozen=True)
class MergeState:
    """Partition P_t (as its cuts), frozen flags F_t, and the pass counter."""

    edges: np.ndarray
    frozen: np.ndarray
    t: int
    s: int

    @property
    def z(self) -> int:
        return len(self.frozen)

    @property
    def intervals(self) -> list[Interval]:
        e = self.edges.tolist()
        return [Interval(a, b) for a, b in zip(e[:-1], e[1:])]

    @property
    def unfrozen_count(self) -> int:
        return int(self.z - self.frozen.sum())

    @property
    def partition(self) -> IntervalPartition:
        return IntervalPartition(self.edges)

    def frozen_intervals(self) -> set[tuple[float, float]]:
        e = self.edges
        return {(float(e[i]), float(e[i + 1])) for i in np.flatnonzero(self.frozen)}

    def to_json(self) -> str:
        return json.dumps(
            {"t": self.t, "s": self.s, "edges": self.edges.tolist(), "frozen": self.frozen.astype(int).tolist()}
        )


def initial_state(partition: IntervalPartition, s: int) -> MergeState:
    return MergeState(np.array(partition.cuts), np.zeros(len(partition), dtype=bool), 0, s)


def merge_pass(state: MergeState, empirical, threshold: float) -> MergeState:
    """One iteration of the loop: freeze (b), case machine (c), reassemble (d)."""
    if state.t >= state.s:
        raise ContractViolation("no passes left")
    edges = state.edges
    z = state.z
    prev = state.frozen
    F = prev.copy()
    if z >= 2:
        cdf = np.asarray(empirical.cdf(edges), dtype=float)
        mass = np.diff(cdf)
        width = np.diff(edges)
        a = merge_cost(mass[:-1], width[:-1], mass[1:], width[1:])
        # condition (i) reads the frozen set from the previous pass
        hit = ~prev[:-1] & ~prev[1:] & (a > threshold)
        F[:-1] |= hit
        F[1:] |= hit

    starts: list[int] = []
    flags: list[bool] = []
    i = 0
    while i < z:
        if i <= z - 2:
            if not F[i] and not F[i + 1]:  # case 1: merge the pair
                starts.append(i)
                flags.append(False)
                i += 2
            elif F[i]:  # case 2: skip a frozen interval
                starts.append(i)
                flags.append(True)
                i += 1
            else:  # case 3: unfrozen before frozen, freeze it
                F[i] = True
                starts.extend((i, i + 1))
                flags.extend((True, True))
                i += 2
        else:  # case 4: the last interval has no partner
            F[i] = True
            starts.append(i)
            flags.append(True)
            i += 1
    new_edges = np.append(edges[starts], 1.0)
    return MergeState(new_edges, np.array(flags, dtype=bool), state.t + 1, state.s)


@dataclass
class LearnerTrace:
    states: list[MergeState]
    hypothesis: PiecewiseDensity
    empirical: Optional[BinnedEmpirical] = None
    config: Optional[LearnerConfig] = field(default=None, repr=False)

    @property
    def final_partition(self) -> IntervalPartition:
        return self.states[-1].partition

    def to_jsonl(self) -> str:
        return "\n".join(st.to_json() for st in self.states) + "\n"


def _run(config: LearnerConfig, source: SampleSource, keep_states: bool) -> LearnerTrace:
    s = config.iterations
    if config.m0 is not None:
        xs = np.sort(source.draw(config.m0, label="partition"))
        P0 = IntervalPartition(cuts_from_sorted(xs, config.kappa))
    else:
        P0 = partition_for_learner(source, config.k, config.eps_prime, config.c0)
    state = initial_state(P0, s)
    if len(P0) < 2:
        # degenerate partition: nothing to merge, no second sample needed
        states = [state]
        for _ in range(s):
            state = merge_pass(state, None, config.threshold)
            states.append(state)
        return LearnerTrace(states if keep_states else [state], PiecewiseDensity.uniform(), None, config)
    counts = source.bin_counts(P0.cuts, config.sample_size, label="empirical")
    emp = BinnedEmpirical(P0.cuts, counts)
    states = [state]
    thr = config.threshold
    for _ in range(s):
        state = merge_pass(state, emp, thr)
        if keep_states:
            states.append(state)
    if not keep_states:
        states = [state]
    return LearnerTrace(states, flatten(emp, state.partition), emp, config)


def learn_wb(config: LearnerConfig, source: SampleSource) -> PiecewiseDensity:
    """Learn a histogram for a well-behaved target with small opt_k.

    Two sampling phases: the partitioning sample and the main sample.
    """
    return _run(config, source, keep_states=False).hypothesis


def learner_trace(config: LearnerConfig, source: SampleSource) -> LearnerTrace:
    """Same computation as ``learn_wb`` with all s + 1 states kept."""
    return _run(config, source, keep_states=True)
