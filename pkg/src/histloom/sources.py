"""Sample access to a target distribution, with draw accounting.

Learners never see the target itself, only a ``SampleSource``.  Every request
is logged as one sampling phase ``(label, n)`` so tests can check how many
draws were taken and in how many batches.

``bin_counts(cuts, n)`` returns the counts of ``n`` fresh draws in the cells
``[cuts[j], cuts[j+1])``.  The default draws the points and bins them; a
source that knows its distribution may instead draw the count vector from the
matching multinomial, which has exactly the same law.
"""

from __future__ import annotations

import numpy as np

from .density import AtomicMixture, BinLookup, DiscreteDistribution, PiecewiseDensity, draw_points

_CHUNK = 1 << 16


class SampleExhausted(RuntimeError):
    """A finite sample source ran out of points."""


class PathologicalTarget(RuntimeError):
    """Almost every draw was rejected by a filtered source."""


def derive_seed(root: int, *path: int) -> np.random.Generator:
    """Counter-based seed splitting: the stream for (root, i, j, ...) is fixed.

    Uses numpy's SeedSequence entropy mixing over the tuple, so serial and
    parallel runs that address the same path get the same stream.
    """
    return np.random.default_rng(np.random.SeedSequence([int(root), *map(int, path)]))


class SampleSource:
    def __init__(self):
        self.draws = 0
        self.log: list[tuple[str, int]] = []

    def _take(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def draw(self, n: int, label: str = "draw") -> np.ndarray:
        if n < 0:
            raise ValueError("n must be nonnegative")
        out = self._take(n)
        self.log.append((label, n))
        return out

    def bin_counts(self, cuts, n: int, label: str = "bin") -> np.ndarray:
        cuts = np.asarray(cuts, dtype=float)
        counts = np.zeros(len(cuts) - 1, dtype=np.int64)
        lookup = BinLookup(cuts)
        done = 0
        while done < n:
            b = min(_CHUNK, n - done)
            pts = self._take(b)
            counts += np.bincount(lookup(pts), minlength=len(counts))[: len(counts)]
            done += b
        self.log.append((label, n))
        return counts

    @property
    def phases(self) -> int:
        return len(self.log)


def _cell_masses(target, cuts: np.ndarray) -> np.ndarray:
    return np.maximum(np.diff(np.asarray(target.cdf(cuts), dtype=float)), 0.0)


class DistributionSource(SampleSource):
    """I.i.d. draws from a known target (synthetic experiments).

    ``exact_binning`` enables the multinomial shortcut for ``bin_counts``;
    benchmarks switch it off so wall time reflects drawing real points.
    """

    def __init__(self, target, rng: np.random.Generator, exact_binning: bool = True):
        super().__init__()
        if isinstance(target, DiscreteDistribution):
            target = AtomicMixture(
                PiecewiseDensity([0.0, 1.0], [0.0]), target.midpoints(), target.weights
            )
        if not isinstance(target, (PiecewiseDensity, AtomicMixture)):
            raise TypeError(f"unsupported target {type(target).__name__}")
        if not target.is_full_distribution:
            raise ValueError("target must be a full distribution")
        self.target = target
        self.rng = rng
        self.exact_binning = exact_binning

    def _take(self, n):
        self.draws += n
        return draw_points(self.target, n, self.rng)

    def cell_masses(self, cuts, exclude=None) -> np.ndarray:
        masses = _cell_masses(self.target, np.asarray(cuts, dtype=float))
        if exclude is not None and len(exclude) and isinstance(self.target, AtomicMixture):
            t = self.target
            hit = np.isin(t.atom_x, np.asarray(list(exclude), dtype=float))
            cell = np.searchsorted(cuts, t.atom_x[hit], side="right") - 1
            np.subtract.at(masses, cell, t.atom_mass[hit])
            masses = np.maximum(masses, 0.0)
        return masses

    def bin_counts(self, cuts, n, label="bin"):
        if not self.exact_binning:
            return super().bin_counts(cuts, n, label)
        masses = self.cell_masses(cuts)
        self.draws += n
        self.log.append((label, n))
        return self.rng.multinomial(n, masses / masses.sum())


class ArraySource(SampleSource):
    """Hands out a fixed array of points in order; raises when exhausted."""

    def __init__(self, points):
        super().__init__()
        self.points = np.asarray(points, dtype=float)

    @property
    def remaining(self) -> int:
        return len(self.points) - self.draws

    def _take(self, n):
        if n > self.remaining:
            raise SampleExhausted(
                f"requested {n} draws but only {self.remaining} of {len(self.points)} remain"
            )
        out = self.points[self.draws : self.draws + n]
        self.draws += n
        return out


class FilteredSource(SampleSource):
    """Conditional distribution of ``inner`` given the draw is not an excluded value.

    Rejection sampling with exact float comparison.  Tracks the acceptance rate
    and raises ``PathologicalTarget`` once it is measurably below
    ``min_acceptance``.
    """

    def __init__(self, inner: SampleSource, excluded, min_acceptance: float = 1e-3):
        super().__init__()
        self.inner = inner
        self.excluded = np.unique(np.asarray(list(excluded), dtype=float))
        self.min_acceptance = min_acceptance
        self.accepted = 0
        self.seen = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.seen if self.seen else 1.0

    def _check_rate(self):
        if self.seen >= 10_000 and self.acceptance_rate < self.min_acceptance:
            raise PathologicalTarget(
                f"acceptance rate {self.acceptance_rate:.2e} below {self.min_acceptance:g}: "
                "nearly all mass sits on removed atoms"
            )

    def _take(self, n):
        out = []
        got = 0
        while got < n:
            need = n - got
            rate = max(self.acceptance_rate, self.min_acceptance)
            batch = min(_CHUNK, int(need / rate * 1.1) + 16)
            pts = self.inner.draw(batch, label="filtered")
            keep = pts[~np.isin(pts, self.excluded)]
            self.seen += batch
            self.accepted += len(keep)
            self._check_rate()
            keep = keep[:need]
            out.append(keep)
            got += len(keep)
        self.draws += n
        return np.concatenate(out) if out else np.empty(0)

    def bin_counts(self, cuts, n, label="bin"):
        inner = self.inner
        if not (isinstance(inner, DistributionSource) and inner.exact_binning):
            return super().bin_counts(cuts, n, label)
        masses = inner.cell_masses(cuts, exclude=self.excluded)
        acc = float(masses.sum())
        if acc < self.min_acceptance:
            raise PathologicalTarget(f"conditional mass {acc:.2e} below {self.min_acceptance:g}")
        rejected = int(inner.rng.negative_binomial(n, min(acc, 1.0))) if n else 0
        inner.draws += n + rejected
        inner.log.append(("filtered", n + rejected))
        self.seen += n + rejected
        self.accepted += n
        self.draws += n
        self.log.append((label, n))
        return inner.rng.multinomial(n, masses / acc)
