"""Partitions of [0, 1) into intervals of roughly equal mass via order statistics."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .density import ContractViolation, Interval
from .sources import SampleSource

C0 = 16


class WellBehavednessWarning(UserWarning):
    """Repeated sample values forced the partitioner to drop or move cuts."""


class IntervalPartition:
    """Ordered half-open intervals [cuts[j-1], cuts[j]) covering [0, 1)."""

    __slots__ = ("cuts",)

    def __init__(self, cuts):
        c = np.asarray(cuts, dtype=float)
        if c.ndim != 1 or len(c) < 2 or c[0] != 0.0 or c[-1] != 1.0:
            raise ContractViolation("cuts must run from 0 to 1")
        if np.any(np.diff(c) <= 0):
            raise ContractViolation("cuts must be strictly increasing")
        c.setflags(write=False)
        self.cuts = c

    @property
    def intervals(self) -> list[Interval]:
        return [Interval(a, b) for a, b in zip(self.cuts[:-1].tolist(), self.cuts[1:].tolist())]

    def __len__(self):
        return len(self.cuts) - 1

    def __iter__(self):
        return iter(self.intervals)

    def to_json(self) -> list[float]:
        return self.cuts.tolist()

    @classmethod
    def from_json(cls, cuts) -> "IntervalPartition":
        return cls(cuts)

    def __repr__(self):
        return f"IntervalPartition(z={len(self)})"


def partition_sample_size(kappa: float, c0: float = C0) -> int:
    return max(1, math.ceil(c0 / kappa * math.log(1.0 / kappa)))


def cuts_from_sorted(xs: np.ndarray, kappa: float) -> np.ndarray:
    """Evenly spaced order statistics of a sorted sample, deduplicated rightward."""
    m0 = len(xs)
    step = max(1, math.ceil(kappa * m0))
    n_int = max(1, min(round((m0 + 1) / step), round(1.0 / kappa)))
    ranks = np.round(np.arange(1, n_int) * (m0 + 1) / n_int).astype(int)
    cuts = [0.0]
    moved = False
    for r in ranks.tolist():
        j = min(max(r - 1, 0), m0 - 1)
        v = xs[j]
        if v <= cuts[-1]:
            # tie or repeated value: take the next distinct order statistic
            j = int(np.searchsorted(xs, cuts[-1], side="right"))
            moved = True
            if j >= m0:
                break
            v = xs[j]
        cuts.append(float(v))
    if moved:
        warnings.warn(
            "repeated sample values moved or dropped partition cuts; the target is "
            "probably not well-behaved at this scale",
            WellBehavednessWarning,
            stacklevel=3,
        )
    cuts.append(1.0)
    return np.array(cuts)


def approx_equal_partition(source: SampleSource, kappa: float, c0: float = C0) -> IntervalPartition:
    """Partition into about 1/kappa intervals of mass about kappa each.

    Draws ``ceil(c0 / kappa * ln(1/kappa))`` points in one batch and cuts at
    evenly spaced order statistics; each interval holds about ``kappa * m0``
    sample points, so true masses concentrate around kappa, well inside
    [kappa/2, 3 kappa].
    """
    if not 0.0 < kappa < 1.0:
        raise ContractViolation("kappa must lie in (0, 1)")
    m0 = partition_sample_size(kappa, c0)
    xs = np.sort(source.draw(m0, label="partition"))
    return IntervalPartition(cuts_from_sorted(xs, kappa))


def learner_kappa(k: int, eps_prime: float) -> float:
    return eps_prime / (6 * k)


def partition_for_learner(source: SampleSource, k: int, eps_prime: float, c0: float = C0) -> IntervalPartition:
    if k < 1:
        raise ContractViolation("k must be at least 1")
    if not 0.0 < eps_prime < 1.0:
        raise ContractViolation("eps_prime must lie in (0, 1)")
    return approx_equal_partition(source, learner_kappa(k, eps_prime), c0)
