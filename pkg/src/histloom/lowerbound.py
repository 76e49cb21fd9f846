"""The hard ensemble D_t over [2N] and experiments around the sqrt(N) barrier.

A draw from D_t puts weight 1/(4N) on a random tN-subset S1 of the first half
and 3/(4N) on a random tN-subset S2 of the second half, rebalancing the rest
of each half so each half keeps mass 1/2.  Uniform on [2N] is at L1 distance
exactly t, yet an explicit 2-flat distribution is at distance about t/2, and
with o(sqrt N) draws the two cannot be told apart.

Weights are exact rationals internally.  The second-half light weight is
applied on [N+1..2N] minus S2; that is the only reading under which the
distance to uniform is t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .density import ContractViolation, DiscreteDistribution, discretize
from .learner import LearnerConfig, learn_wb
from .partition import WellBehavednessWarning
from .sources import ArraySource

Rational = Union[Fraction, float, str, int]


def as_fraction(t: Rational) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, float):
        return Fraction(repr(t))
    return Fraction(t)


def hard_levels(N: int, t: Fraction) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(weight on S1, on [N] minus S1, on S2, on [N+1..2N] minus S2)."""
    shift = t / (2 * (1 - t))
    return (
        Fraction(1, 4 * N),
        Fraction(1, 2 * N) * (1 + shift),
        Fraction(3, 4 * N),
        Fraction(1, 2 * N) * (1 - shift),
    )


def witness_levels(N: int, t: Fraction) -> tuple[Fraction, Fraction]:
    shift = t / (2 * (1 - t))
    return Fraction(1, 2 * N) * (1 + shift), Fraction(1, 2 * N) * (1 - shift)


def witness_distance(t: Rational) -> Fraction:
    """(t/2)(1 + t/(1-t)): L1 distance from any member of D_t to the 2-flat witness."""
    t = as_fraction(t)
    return t / 2 * (1 + t / (1 - t))


@dataclass
class HardInstance:
    N: int
    t: Fraction
    S1: np.ndarray  # subset of 1..N
    S2: np.ndarray  # subset of N+1..2N

    @property
    def size(self) -> int:
        return int(self.t * self.N)

    @cached_property
    def levels(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return hard_levels(self.N, self.t)

    @property
    def exact_total(self) -> Fraction:
        a, b, c, d = self.levels
        n, tn = self.N, self.size
        return tn * a + (n - tn) * b + tn * c + (n - tn) * d

    @cached_property
    def _weights(self) -> np.ndarray:
        a, b, c, d = (float(x) for x in self.levels)
        w = np.empty(2 * self.N)
        w[: self.N] = b
        w[self.N :] = d
        w[self.S1 - 1] = a
        w[self.S2 - 1] = c
        return w

    @property
    def distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution(self._weights)

    @cached_property
    def _complements(self) -> tuple[np.ndarray, np.ndarray]:
        first = np.ones(self.N + 1, dtype=bool)
        first[0] = False
        first[self.S1] = False
        second = np.ones(self.N + 1, dtype=bool)
        second[0] = False
        second[self.S2 - self.N] = False
        return np.flatnonzero(first), np.flatnonzero(second) + self.N

    def draw(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m i.i.d. labels in 1..2N, sampled block by block."""
        a, b, c, d = self.levels
        tn, rest = self.size, self.N - self.size
        block_mass = np.array([float(tn * a), float(rest * b), float(tn * c), float(rest * d)])
        counts = rng.multinomial(m, block_mass / block_mass.sum())
        c1, c2 = self._complements
        parts = [
            self.S1[rng.integers(0, tn, counts[0])],
            c1[rng.integers(0, rest, counts[1])],
            self.S2[rng.integers(0, tn, counts[2])],
            c2[rng.integers(0, rest, counts[3])],
        ]
        out = np.concatenate(parts)
        rng.shuffle(out)
        return out

    def witness(self) -> DiscreteDistribution:
        hi, lo = (float(x) for x in witness_levels(self.N, self.t))
        return DiscreteDistribution(np.repeat([hi, lo], self.N))

    def exact_l1_to_uniform(self) -> Fraction:
        a, b, c, d = self.levels
        u = Fraction(1, 2 * self.N)
        tn, rest = self.size, self.N - self.size
        return tn * abs(a - u) + rest * abs(b - u) + tn * abs(c - u) + rest * abs(d - u)

    def exact_l1_to_witness(self) -> Fraction:
        a, b, c, d = self.levels
        hi, lo = witness_levels(self.N, self.t)
        tn, rest = self.size, self.N - self.size
        return tn * abs(a - hi) + rest * abs(b - hi) + tn * abs(c - lo) + rest * abs(d - lo)


def _check_params(N: int, t: Fraction) -> None:
    if not 0 < t < Fraction(1, 2):
        raise ContractViolation("t must lie in (0, 1/2)")
    tn = t * N
    if tn.denominator != 1 or tn < 1:
        raise ContractViolation(f"t*N = {tn} must be a positive integer")


def sample_hard_instance(N: int, t: Rational, rng: np.random.Generator) -> HardInstance:
    """Draw p_{S1,S2,t} from D_t; subsets via numpy's partial Fisher-Yates."""
    t = as_fraction(t)
    _check_params(N, t)
    tn = int(t * N)
    S1 = np.sort(rng.choice(N, size=tn, replace=False)) + 1
    S2 = np.sort(rng.choice(N, size=tn, replace=False)) + N + 1
    return HardInstance(N, t, S1, S2)


def count_collisions(labels: np.ndarray) -> int:
    _, c = np.unique(labels, return_counts=True)
    return int((c * (c - 1) // 2).sum())


@dataclass
class CollisionDistinguisher:
    """Says "uniform" when the collision count is at most the midpoint between
    its expectation under uniform and under D_t."""

    N: int
    t: Fraction
    name: str = "collision"

    def threshold(self, m: int) -> float:
        t = float(self.t)
        return m * (m - 1) / 2 / (2 * self.N) * (1 + t / (8 * (1 - t)))

    def __call__(self, labels: np.ndarray, rng=None) -> tuple[bool, float]:
        c = count_collisions(labels)
        return c <= self.threshold(len(labels)), float(c)


@dataclass
class LearnerDistinguisher:
    """Learn a 2-flat-ish hypothesis from the draws alone and call the target
    uniform when the hypothesis is within 3 eps / 2 of uniform.

    Only the m given draws are used: half for the partition, half as the main
    sample.
    """

    N: int
    eps: float
    name: str = "learner"

    def __call__(self, labels: np.ndarray, rng=None) -> tuple[bool, float]:
        m = len(labels)
        if m < 2:
            return True, 0.0
        pts = (labels - 0.5) / (2 * self.N)
        m0 = m // 2
        cfg = LearnerConfig(k=2, eps=self.eps, m0=m0, m=m - m0)
        # repeated labels are expected on a discrete domain
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WellBehavednessWarning)
            h = learn_wb(cfg, ArraySource(pts))
        dist = discretize(h, 2 * self.N)
        d = float(np.abs(dist.weights - 1.0 / (2 * self.N)).sum())
        return d < 1.5 * self.eps, d


def make_distinguisher(name: str, N: int, t: Fraction, eps: float | None = None):
    if name == "collision":
        return CollisionDistinguisher(N, t)
    if name == "learner":
        return LearnerDistinguisher(N, eps if eps is not None else 0.1)
    raise ValueError(f"unknown distinguisher {name!r}")


@dataclass
class ExperimentReport:
    N: int
    t: float
    m: int
    trials: int
    distinguisher: str
    rate_uniform: float
    rate_hard: float
    stats_uniform: list[float] = field(repr=False)
    stats_hard: list[float] = field(repr=False)

    @property
    def advantage(self) -> float:
        return abs(self.rate_uniform - self.rate_hard)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "t": self.t,
            "m": self.m,
            "trials": self.trials,
            "distinguisher": self.distinguisher,
            "rate_uniform": self.rate_uniform,
            "rate_hard": self.rate_hard,
            "advantage": self.advantage,
        }

    def csv_rows(self) -> list[tuple]:
        rows = [("uniform", i, s) for i, s in enumerate(self.stats_uniform)]
        rows += [("hard", i, s) for i, s in enumerate(self.stats_hard)]
        return rows


def distinguishing_experiment(
    N: int,
    t: Rational,
    m: int,
    trials: int,
    distinguisher: Union[str, Callable] = "collision",
    rng: np.random.Generator | None = None,
    eps: float | None = None,
) -> ExperimentReport:
    """Acceptance rates ("uniform" verdicts) under U_2N and under fresh draws from D_t."""
    t = as_fraction(t)
    _check_params(N, t)
    if m < 1 or trials < 1:
        raise ContractViolation("m and trials must be at least 1")
    rng = rng if rng is not None else np.random.default_rng()
    B = make_distinguisher(distinguisher, N, t, eps) if isinstance(distinguisher, str) else distinguisher
    acc_u = acc_h = 0
    st_u, st_h = [], []
    for _ in range(trials):
        ok, s = B(rng.integers(1, 2 * N + 1, size=m), rng)
        acc_u += ok
        st_u.append(s)
        inst = sample_hard_instance(N, t, rng)
        ok, s = B(inst.draw(m, rng), rng)
        acc_h += ok
        st_h.append(s)
    return ExperimentReport(
        N, float(t), m, trials, getattr(B, "name", "custom"), acc_u / trials, acc_h / trials, st_u, st_h
    )


def repeat_fraction(N: int, t: Rational, m: int, trials: int, rng: np.random.Generator) -> tuple[float, float]:
    """Fraction of trials whose m draws contain a repeated label, per regime."""
    t = as_fraction(t)
    rep_u = rep_h = 0
    for _ in range(trials):
        rep_u += count_collisions(rng.integers(1, 2 * N + 1, size=m)) > 0
        rep_h += count_collisions(sample_hard_instance(N, t, rng).draw(m, rng)) > 0
    return rep_u / trials, rep_h / trials


def floor_parameters(delta: float) -> tuple[float, float]:
    """(t, eps) used in the reduction: t = d/(2+d), eps = d^3/(12(2+d))."""
    return delta / (2 + delta), delta**3 / (12 * (2 + delta))


def agnostic_floor_demo(
    N: int,
    delta: float,
    m: int,
    trials: int,
    rng: np.random.Generator | None = None,
    eps: float | None = None,
) -> dict:
    """Run the learner-based distinguisher below the sqrt(N) barrier.

    The analytic gap printed alongside is the lower bound on ||h - U|| that a
    (2 - delta)-agnostic learner would have to achieve under D_t.
    """
    t, eps_proof = floor_parameters(delta)
    t_frac = as_fraction(Fraction(delta).limit_denominator(10**6) / (2 + Fraction(delta).limit_denominator(10**6)))
    _check_params(N, t_frac)
    eps = eps_proof if eps is None else eps
    gap = t - (2 - delta) * (t / 2) * (1 + t / (1 - t)) - eps_proof
    rep = distinguishing_experiment(N, t_frac, m, trials, LearnerDistinguisher(N, eps), rng)
    q = lambda xs: [float(np.quantile(xs, p)) for p in (0.1, 0.5, 0.9)]  # noqa: E731
    return {
        "N": N,
        "delta": delta,
        "t": t,
        "eps_proof": eps_proof,
        "eps_used": eps,
        "m": m,
        "sqrt_N": math.sqrt(N),
        "trials": trials,
        "analytic_gap": gap,
        "analytic_gap_over_eps": gap / eps_proof,
        "rate_uniform": rep.rate_uniform,
        "rate_hard": rep.rate_hard,
        "advantage": rep.advantage,
        "dist_to_uniform_uniform_q10_50_90": q(rep.stats_uniform),
        "dist_to_uniform_hard_q10_50_90": q(rep.stats_hard),
    }
