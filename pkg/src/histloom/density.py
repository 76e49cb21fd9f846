"""Piecewise-constant densities on [0, 1) and the exact arithmetic on them.

Every object that can be integrated over a half-open interval exposes
``cdf(x)``, the mass on ``[0, x)``.  ``mass_on``, ``flatten`` and ``alpha`` are
written against that single method, so they work uniformly for densities,
empirical samples, binned samples and atom mixtures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

MASS_TOL = 1e-9


class ContractViolation(ValueError):
    """An operation was called outside its documented precondition."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ContractViolation(f"invalid interval [{self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x < self.hi

    def __iter__(self):
        return iter((self.lo, self.hi))


def as_interval(I) -> Interval:
    return I if isinstance(I, Interval) else Interval(float(I[0]), float(I[1]))


class PiecewiseDensity:
    """Nonnegative step function on [0, 1).

    ``values[i]`` is the density on ``[breakpoints[i], breakpoints[i+1])``.
    Zero-width pieces are dropped at construction.  Sub-distributions are
    allowed; ``is_full_distribution`` tells them apart.
    """

    __slots__ = ("breakpoints", "values", "_cum")

    def __init__(self, breakpoints, values):
        bp = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or len(bp) != len(vals) + 1:
            raise ContractViolation("need len(breakpoints) == len(values) + 1")
        if len(vals) == 0:
            raise ContractViolation("a density needs at least one piece")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ContractViolation("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) < 0):
            raise ContractViolation("breakpoints must be sorted")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ContractViolation("density values must be finite and nonnegative")
        keep = np.diff(bp) > 0
        if not keep.all():
            vals = vals[keep]
            bp = np.concatenate([bp[:-1][keep], [1.0]])
        self.breakpoints = _frozen(bp)
        self.values = _frozen(vals)
        self._cum = _frozen(np.concatenate([[0.0], np.cumsum(vals * np.diff(bp))]))

    @classmethod
    def uniform(cls) -> "PiecewiseDensity":
        return cls([0.0, 1.0], [1.0])

    @classmethod
    def from_masses(cls, cuts, masses) -> "PiecewiseDensity":
        cuts = np.asarray(cuts, dtype=float)
        return cls(cuts, np.asarray(masses, dtype=float) / np.diff(cuts))

    @property
    def pieces(self) -> int:
        return len(self.values)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self._cum)

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    @property
    def is_full_distribution(self) -> bool:
        return abs(self.total_mass - 1.0) <= MASS_TOL

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.pieces - 1)
        out = self.values[idx]
        return np.where((x >= 0) & (x < 1), out, 0.0)

    def cdf(self, x):
        """Mass on [0, x); exact up to float rounding."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.pieces - 1)
        out = self._cum[idx] + self.values[idx] * (x - self.breakpoints[idx])
        return out if out.ndim else float(out)

    def scaled(self, a: float) -> "PiecewiseDensity":
        return PiecewiseDensity(self.breakpoints, self.values * a)

    def normalized(self) -> "PiecewiseDensity":
        if self.total_mass <= 0:
            raise ContractViolation("cannot normalize a zero density")
        return self.scaled(1.0 / self.total_mass)

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseDensity":
        return cls(d["breakpoints"], d["values"])

    def same_as(self, other: "PiecewiseDensity") -> bool:
        return (
            np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"PiecewiseDensity(pieces={self.pieces}, mass={self.total_mass:.6g})"


class EmpiricalSample:
    """Sorted multiset of draws; the empirical distribution p-hat_m."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.sort(np.asarray(points, dtype=float).ravel())
        if len(pts) and (pts[0] < 0.0 or pts[-1] >= 1.0):
            raise ContractViolation("sample points must lie in [0, 1)")
        self.points = _frozen(pts)

    @property
    def m(self) -> int:
        return len(self.points)

    def cdf(self, x):
        if self.m == 0:
            raise ContractViolation("empty sample has no empirical distribution")
        out = np.searchsorted(self.points, x, side="left") / self.m
        return out if np.ndim(out) else float(out)

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"EmpiricalSample(m={self.m})"


class BinnedEmpirical:
    """Empirical distribution known only through counts on a fixed grid of cells.

    Queries are restricted to intervals whose endpoints are grid cuts; for
    those the answer equals the empirical mass of the underlying draws.
    """

    __slots__ = ("cuts", "counts", "_prefix")

    def __init__(self, cuts, counts):
        self.cuts = _frozen(cuts)
        counts = np.asarray(counts, dtype=np.int64)
        if len(counts) != len(self.cuts) - 1:
            raise ContractViolation("need one count per cell")
        self.counts = counts
        self._prefix = np.concatenate([[0], np.cumsum(counts)])

    @property
    def m(self) -> int:
        return int(self._prefix[-1])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.cuts, x)
        idx_c = np.clip(idx, 0, len(self.cuts) - 1)
        if np.any(self.cuts[idx_c] != x):
            raise ContractViolation("binned empirical queried off its grid")
        out = self._prefix[idx_c] / self.m
        return out if out.ndim else float(out)


class DiscreteDistribution:
    """Weights over the domain {1, ..., M}."""

    __slots__ = ("weights",)

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ContractViolation("weights must be a nonempty vector")
        if np.any(w < 0):
            raise ContractViolation("weights must be nonnegative")
        self.weights = _frozen(w)

    @property
    def M(self) -> int:
        return len(self.weights)

    @property
    def is_full_distribution(self) -> bool:
        return abs(float(self.weights.sum()) - 1.0) <= 1e-12

    def l1(self, other: "DiscreteDistribution") -> float:
        return float(np.abs(self.weights - other.weights).sum())

    def as_density(self) -> PiecewiseDensity:
        """Cell-uniform embedding: atom i spread over [(i-1)/M, i/M)."""
        return PiecewiseDensity(np.arange(self.M + 1) / self.M, self.weights * self.M)

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) / self.M


class AtomicMixture:
    """Sub-distribution histogram part plus explicit point masses.

    Total mass is ``histogram.total_mass + atom_masses.sum()``.
    """

    __slots__ = ("histogram", "atom_x", "atom_mass")

    def __init__(self, histogram: PiecewiseDensity, atom_x=(), atom_mass=()):
        x = np.asarray(atom_x, dtype=float)
        w = np.asarray(atom_mass, dtype=float)
        if x.shape != w.shape:
            raise ContractViolation("atom locations and masses must align")
        if len(x) and (x.min() < 0 or x.max() >= 1):
            raise ContractViolation("atoms must lie in [0, 1)")
        if len(np.unique(x)) != len(x):
            raise ContractViolation("atom locations must be distinct")
        if np.any(w < 0):
            raise ContractViolation("atom masses must be nonnegative")
        order = np.argsort(x)
        self.histogram = histogram
        self.atom_x = _frozen(x[order])
        self.atom_mass = _frozen(w[order])

    @property
    def total_mass(self) -> float:
        return self.histogram.total_mass + float(self.atom_mass.sum())

    @property
    def is_full_distribution(self) -> bool:
        return abs(self.total_mass - 1.0) <= MASS_TOL

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.atom_x.tolist(), self.atom_mass.tolist()))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        atom_cum = np.concatenate([[0.0], np.cumsum(self.atom_mass)])
        below = atom_cum[np.searchsorted(self.atom_x, x, side="left")]
        out = self.histogram.cdf(x) + below
        return out if np.ndim(out) else float(out)

    def to_dict(self) -> dict:
        return {
            "histogram": self.histogram.to_dict(),
            "atoms": [{"x": x, "mass": w} for x, w in self.atoms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AtomicMixture":
        atoms = d.get("atoms", [])
        return cls(
            PiecewiseDensity.from_dict(d["histogram"]),
            [a["x"] for a in atoms],
            [a["mass"] for a in atoms],
        )

    def __repr__(self):
        return f"AtomicMixture(pieces={self.histogram.pieces}, atoms={len(self.atom_x)})"


Measure = Union[PiecewiseDensity, EmpiricalSample, BinnedEmpirical, AtomicMixture]


def mass_on(r: Measure, I) -> float:
    I = as_interval(I)
    return float(r.cdf(I.hi) - r.cdf(I.lo))


def _interval_arrays(P) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(P, "cuts"):
        cuts = np.asarray(P.cuts, dtype=float)
        return cuts[:-1], cuts[1:]
    ivs = sorted((as_interval(I) for I in P), key=lambda I: I.lo)
    lo = np.array([I.lo for I in ivs])
    hi = np.array([I.hi for I in ivs])
    if np.any(lo[1:] < hi[:-1]):
        raise ContractViolation("intervals overlap")
    return lo, hi


def flatten(r: Measure, P) -> PiecewiseDensity:
    """Replace r on each interval of P by its average density; zero elsewhere."""
    lo, hi = _interval_arrays(P)
    if len(lo) == 0:
        return PiecewiseDensity([0.0, 1.0], [0.0])
    masses = np.asarray(r.cdf(hi)) - np.asarray(r.cdf(lo))
    dens = masses / (hi - lo)
    # interleave gaps (density 0) between non-adjacent intervals
    bps = [0.0]
    vals = []
    for a, b, d in zip(lo.tolist(), hi.tolist(), dens.tolist()):
        if a > bps[-1]:
            vals.append(0.0)
            bps.append(a)
        vals.append(d)
        bps.append(b)
    if bps[-1] < 1.0:
        vals.append(0.0)
        bps.append(1.0)
    return PiecewiseDensity(bps, vals)


def merge_cost(mass_i, width_i, mass_j, width_j):
    """Closed-form merge cost, vectorized over arrays of consecutive pairs."""
    return 2.0 / (width_i + width_j) * np.abs(mass_i * width_j - mass_j * width_i)


def alpha(r: Measure, I, J) -> float:
    """L1 damage of flattening r on I and J jointly rather than separately."""
    I, J = as_interval(I), as_interval(J)
    if I.hi != J.lo:
        raise ContractViolation("alpha needs consecutive intervals (I.hi == J.lo)")
    return float(merge_cost(mass_on(r, I), I.width, mass_on(r, J), J.width))


def common_refinement(f: PiecewiseDensity, g: PiecewiseDensity):
    """Merged breakpoints and the values of f and g on each refined cell."""
    edges = np.union1d(f.breakpoints, g.breakpoints)
    left = edges[:-1]
    fi = np.searchsorted(f.breakpoints, left, side="right") - 1
    gi = np.searchsorted(g.breakpoints, left, side="right") - 1
    return edges, f.values[fi], g.values[gi]


def l1_distance(f, g) -> float:
    """Exact integral of |f - g|; atom mixtures compare atoms location by location."""
    if isinstance(f, AtomicMixture) or isinstance(g, AtomicMixture):
        fm = f if isinstance(f, AtomicMixture) else AtomicMixture(f)
        gm = g if isinstance(g, AtomicMixture) else AtomicMixture(g)
        xs = np.union1d(fm.atom_x, gm.atom_x)
        fa = np.zeros(len(xs))
        ga = np.zeros(len(xs))
        fa[np.searchsorted(xs, fm.atom_x)] = fm.atom_mass
        ga[np.searchsorted(xs, gm.atom_x)] = gm.atom_mass
        return l1_distance(fm.histogram, gm.histogram) + float(np.abs(fa - ga).sum())
    edges, fv, gv = common_refinement(f, g)
    return float(np.sum(np.abs(fv - gv) * np.diff(edges)))


def tv_distance(f, g) -> float:
    return l1_distance(f, g) / 2.0


class BinLookup:
    """Cell index of points in [0, 1) for sorted cuts, in O(1) per point.

    A uniform grid of about 16 buckets per cell maps each point to its cell
    directly; only points in buckets that straddle a cut fall back to binary
    search.  Equivalent to ``searchsorted(cuts, x, side="right") - 1`` clipped to
    the valid cells.
    """

    def __init__(self, cuts: np.ndarray, per_cell: int = 16):
        self.cuts = np.asarray(cuts, dtype=float)
        n = len(self.cuts) - 1
        self.G = max(1, per_cell * n)
        grid = np.arange(self.G + 1) / self.G
        at = np.searchsorted(self.cuts, grid, side="right") - 1
        lo = np.clip(at[:-1], 0, n - 1)
        # a bucket is clean when no cut lies strictly inside it
        hi = np.clip(np.searchsorted(self.cuts, np.nextafter(grid[1:], 0.0), side="right") - 1, 0, n - 1)
        self.lo = lo
        self.clean = lo == hi

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        b = np.minimum((pts * self.G).astype(np.int64), self.G - 1)
        idx = self.lo[b]
        dirty = np.flatnonzero(~self.clean[b])
        if len(dirty):
            idx[dirty] = np.clip(np.searchsorted(self.cuts, pts[dirty], side="right") - 1, 0, len(self.cuts) - 2)
        return idx


def _piecewise_sample(f: PiecewiseDensity, m: int, rng: np.random.Generator) -> np.ndarray:
    cum = f._cum / f.total_mass
    u = rng.random(m)
    j = BinLookup(cum)(u) if f.pieces > 1 else np.zeros(m, dtype=np.int64)
    # zero-mass pieces have cum[j] == cum[j+1] and are never selected by side="right"
    x = f.breakpoints[j] + (u - cum[j]) * f.total_mass / f.values[j]
    upper = np.nextafter(f.breakpoints[j + 1], 0.0)
    return np.minimum(np.maximum(x, f.breakpoints[j]), upper)


def draw_points(f, m: int, rng: np.random.Generator) -> np.ndarray:
    """m i.i.d. draws from f, in draw order (unsorted)."""
    if m < 0:
        raise ContractViolation("m must be nonnegative")
    if isinstance(f, PiecewiseDensity):
        if not f.is_full_distribution:
            raise ContractViolation("cannot sample from a sub-distribution")
        return _piecewise_sample(f, m, rng)
    if isinstance(f, DiscreteDistribution):
        if not f.is_full_distribution:
            raise ContractViolation("cannot sample from a sub-distribution")
        return f.midpoints()[rng.choice(f.M, size=m, p=f.weights)]
    if isinstance(f, AtomicMixture):
        if not f.is_full_distribution:
            raise ContractViolation("cannot sample from a sub-distribution")
        probs = np.concatenate([[f.histogram.total_mass], f.atom_mass])
        probs = probs / probs.sum()
        which = rng.choice(len(probs), size=m, p=probs)
        out = np.empty(m)
        cont = which == 0
        n_cont = int(cont.sum())
        if n_cont:
            out[cont] = _piecewise_sample(f.histogram, n_cont, rng)
        if len(f.atom_x):
            out[~cont] = f.atom_x[which[~cont] - 1]
        return out
    raise TypeError(f"cannot sample from {type(f).__name__}")


def sample(f, m: int, rng: np.random.Generator, raw: bool = False):
    """Draw an EmpiricalSample of size m.

    For a DiscreteDistribution over [M], atom i lands on the midpoint
    (i - 0.5) / M; ``raw=True`` returns the integer labels 1..M instead.
    """
    if m < 1:
        raise ContractViolation("m must be at least 1")
    if raw:
        if not isinstance(f, DiscreteDistribution):
            raise ContractViolation("raw output only applies to discrete distributions")
        if not f.is_full_distribution:
            raise ContractViolation("cannot sample from a sub-distribution")
        return rng.choice(f.M, size=m, p=f.weights) + 1
    return EmpiricalSample(draw_points(f, m, rng))


def discretize(f: Measure, M: int) -> DiscreteDistribution:
    """Masses of f on the M equal cells [(i-1)/M, i/M)."""
    if M < 1:
        raise ContractViolation("M must be at least 1")
    grid = np.arange(M + 1) / M
    return DiscreteDistribution(np.maximum(np.diff(np.asarray(f.cdf(grid))), 0.0))


def discrete_flatten(d: DiscreteDistribution, cell_cuts: Sequence[int]) -> DiscreteDistribution:
    """Average the weights of d over blocks of cells delimited by integer cuts."""
    cuts = np.asarray(cell_cuts, dtype=int)
    out = np.empty(d.M)
    for a, b in zip(cuts[:-1], cuts[1:]):
        out[a:b] = d.weights[a:b].sum() / (b - a)
    return DiscreteDistribution(out)


def density_from_levels(breaks: Iterable[float], levels: Iterable[float]) -> PiecewiseDensity:
    """Build a density from interior breakpoints and one level per piece."""
    return PiecewiseDensity([0.0, *breaks, 1.0], list(levels))
