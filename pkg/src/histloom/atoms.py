"""Heavy atoms: find point masses that break well-behavedness, learn around them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import AtomicMixture, ContractViolation, PiecewiseDensity
from .learner import LearnerConfig, learn_wb
from .selection import agnostic_learn
from .sources import FilteredSource, SampleSource

C4 = 12
MIN_ACCEPTANCE = 1e-3


@dataclass(frozen=True)
class HeavySet:
    atoms: tuple[tuple[float, float], ...]
    threshold: float
    n: int

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    def __len__(self):
        return len(self.atoms)


def heavy_threshold(k: int, eps: float) -> float:
    """Well-behavedness level the learner needs: (eps / log2(1/eps)) / (384 k)."""
    return eps / math.log2(1.0 / eps) / (384 * k)


def detection_sample_size(kappa_star: float, c4: float = C4) -> int:
    return max(1, math.ceil(c4 / kappa_star * math.log(1.0 / kappa_star)))


def detect_heavy(source: SampleSource, kappa_star: float, c4: float = C4) -> HeavySet:
    """Every exact value seen at least (kappa_star / 2) * n times in n draws."""
    if not 0.0 < kappa_star < 1.0:
        raise ContractViolation("kappa_star must lie in (0, 1)")
    n = detection_sample_size(kappa_star, c4)
    vals, counts = np.unique(source.draw(n, label="detect"), return_counts=True)
    heavy = counts >= kappa_star / 2.0 * n
    atoms = tuple((float(x), int(c) / n) for x, c in zip(vals[heavy], counts[heavy]))
    return HeavySet(atoms, kappa_star, n)


def learn_with_atoms(
    k: int,
    eps: float,
    source: SampleSource,
    assume_small_opt: bool = False,
    c4: float = C4,
    **kw,
) -> AtomicMixture:
    """Remove heavy atoms, learn the conditional remainder, reattach the atoms.

    The histogram part is scaled by the estimated non-atomic mass so the
    output has total mass one.  When the atoms carry essentially all the mass
    the histogram part is a uniform density of the (tiny) leftover weight.
    """
    heavy = detect_heavy(source, heavy_threshold(k, eps), c4)
    rest = 1.0 - heavy.mass
    if rest < MIN_ACCEPTANCE:
        hist = PiecewiseDensity.uniform().scaled(max(rest, 0.0))
    else:
        cond = FilteredSource(source, heavy.locations, min_acceptance=MIN_ACCEPTANCE) if len(heavy) else source
        if assume_small_opt:
            h = learn_wb(LearnerConfig(k=k, eps=eps, **kw), cond)
        else:
            h = agnostic_learn(k, eps, cond, **kw)
        hist = h.scaled(rest)
    return AtomicMixture(hist, heavy.locations, [w for _, w in heavy.atoms])
