"""Ground-truth instruments: exact opt_k brackets, A_ell distances, quadrature checks.

opt_k is reported in L1 units throughout (twice the total variation distance).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize, sparse

from .density import (
    ContractViolation,
    DiscreteDistribution,
    EmpiricalSample,
    PiecewiseDensity,
    common_refinement,
    discretize,
    draw_points,
    l1_distance,
)

MAX_GRID = 4096
LAGRANGE_MAX_GRID = 256
LAGRANGE_STEPS = 21
EXHAUSTIVE_PARTITIONS = 120


@dataclass(frozen=True)
class OptKResult:
    """Bracket lower <= opt_k(p) <= upper, with ``argmin`` attaining ``upper``."""

    lower: float
    upper: float
    argmin: PiecewiseDensity
    breakpoints_of_q: np.ndarray

    @property
    def value(self) -> float:
        return self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "argmin": self.argmin.to_dict(),
            "breakpoints_of_q": self.breakpoints_of_q.tolist(),
        }


def grid_size(f: PiecewiseDensity, max_grid: int = MAX_GRID) -> int:
    """Smallest M such that every breakpoint of f is a multiple of 1/M."""
    M = 1
    for b in f.breakpoints[1:-1].tolist():
        fr = Fraction(b).limit_denominator(max_grid)
        if abs(float(fr) - b) > 1e-12:
            raise ContractViolation(f"breakpoint {b} is not on a grid of size <= {max_grid}")
        M = M * fr.denominator // math.gcd(M, fr.denominator)
        if M > max_grid:
            raise ContractViolation(f"grid size {M} exceeds {max_grid}")
    return M


def segment_costs(d: np.ndarray) -> np.ndarray:
    """cost[a, b] = min_c sum_{a <= i < b} |d_i - c| for equal-width cells.

    Running median via two heaps, one sweep per start index.
    """
    M = len(d)
    cost = np.full((M + 1, M + 1), np.inf)
    for a in range(M):
        lo: list[float] = []  # max-heap (negated): lower half
        hi: list[float] = []  # min-heap: upper half
        s_lo = s_hi = 0.0
        row = cost[a]
        for b in range(a, M):
            x = float(d[b])
            if lo and x <= -lo[0]:
                heapq.heappush(lo, -x)
                s_lo += x
            else:
                heapq.heappush(hi, x)
                s_hi += x
            if len(lo) > len(hi) + 1:
                y = -heapq.heappop(lo)
                s_lo -= y
                heapq.heappush(hi, y)
                s_hi += y
            elif len(hi) > len(lo):
                y = heapq.heappop(hi)
                s_hi -= y
                heapq.heappush(lo, -y)
                s_lo += y
            med = -lo[0]
            row[b + 1] = (med * len(lo) - s_lo) + (s_hi - med * len(hi))
    return cost


def best_level(d: np.ndarray) -> float:
    """An L1-optimal constant for the cells d, chosen nearest their mean.

    Any point between the lower and upper median is optimal; picking the one
    closest to the mean keeps the fitted mass as close to the true mass as the
    optimality allows.
    """
    srt = np.sort(d)
    n = len(srt)
    lo_med, hi_med = srt[(n - 1) // 2], srt[n // 2]
    return float(np.clip(srt.mean(), lo_med, hi_med))


def _as_discrete(p) -> DiscreteDistribution:
    if isinstance(p, DiscreteDistribution):
        return p
    if isinstance(p, PiecewiseDensity):
        return discretize(p, grid_size(p))
    raise TypeError(f"unsupported input {type(p).__name__}")


def _dp(cost: np.ndarray, k: int) -> tuple[float, list[int]]:
    """Best partition of the M cells into at most k segments under ``cost``."""
    M = cost.shape[0] - 1
    best = cost[0].copy()
    back = [np.zeros(M + 1, dtype=int)]
    for _ in range(1, k):
        cand = best[:, None] + cost
        arg = np.argmin(cand, axis=0)
        nxt = cand[arg, np.arange(M + 1)]
        improve = nxt < best
        back.append(np.where(improve, arg, -1))
        best = np.where(improve, nxt, best)
    # backtrack: a -1 pointer means the previous layer's solution was kept
    cuts = [M]
    b, j = M, k - 1
    while j >= 1:
        a = back[j][b]
        if a >= 0:
            cuts.append(int(a))
            b = int(a)
        j -= 1
    cuts.append(0)
    return float(best[M]), sorted(set(cuts))


def _penalized_costs(d: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """cost[l, a, b] = min_c sum |d_i - c| + lams[l] * c * (b - a) over cells a..b-1.

    The minimizer is an order statistic of the segment at rank about (1 - lam)/2.
    """
    M = len(d)
    out = np.full((len(lams), M + 1, M + 1), np.inf)
    for n in range(1, M + 1):
        win = np.sort(np.lib.stride_tricks.sliding_window_view(d, n), axis=1)
        pre = np.concatenate([np.zeros((len(win), 1)), np.cumsum(win, axis=1)], axis=1)
        q = np.clip(np.ceil(n * (1 - lams) / 2).astype(int) - 1, 0, n - 1)
        c = win[:, q]  # (windows, lams)
        below = (q + 1) * c - pre[:, q + 1]
        above = (pre[:, n : n + 1] - pre[:, q + 1]) - (n - q - 1) * c
        a = np.arange(len(win))
        out[:, a, a + n] = (below + above + lams * n * c).T
    return out


def _constrained_refit(d: np.ndarray, cuts: list[int]) -> PiecewiseDensity:
    """Best levels on a fixed partition subject to unit total mass (a small LP)."""
    M, J = len(d), len(cuts) - 1
    seg = np.repeat(np.arange(J), np.diff(cuts))
    rows = np.arange(M)
    # variables: J levels, then M slacks e_i >= |d_i - c_seg(i)|
    lvl = sparse.csr_matrix((np.ones(M), (rows, seg)), shape=(M, J))
    eye = sparse.identity(M, format="csr")
    A_ub = sparse.vstack([sparse.hstack([lvl, -eye]), sparse.hstack([-lvl, -eye])])
    b_ub = np.concatenate([d, -d])
    A_eq = np.concatenate([np.diff(cuts) / M, np.zeros(M)])[None, :]
    obj = np.concatenate([np.zeros(J), np.full(M, 1.0 / M)])
    res = optimize.linprog(obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"refit LP failed: {res.message}")
    return PiecewiseDensity(np.array(cuts) / M, np.maximum(res.x[:J], 0.0)).normalized()


def opt_k_exact(p, k: int) -> OptKResult:
    """Bracket the L1 distance from p to the nearest k-flat distribution.

    ``lower`` is the exact best k-piece fit without the unit-mass constraint
    (so it never exceeds opt_k). ``upper`` is the best certified distribution
    found: the lower fit rescaled (at most twice ``lower``) and mass-constrained
    refits of candidate partitions. Candidates are every partition when there
    are at most EXHAUSTIVE_PARTITIONS of them (then ``upper`` is exact), else
    those from a sweep over the mass multiplier on grids up to
    LAGRANGE_MAX_GRID.
    """
    if k < 1:
        raise ContractViolation("k must be at least 1")
    dist = _as_discrete(p)
    M = dist.M
    if M > MAX_GRID:
        raise ContractViolation(f"grid size {M} exceeds {MAX_GRID}")
    k = min(k, M)
    d = dist.weights * M
    lower, cuts = _dp(segment_costs(d) / M, k)

    levels = [best_level(d[a:b]) for a, b in zip(cuts[:-1], cuts[1:])]
    fit = PiecewiseDensity(np.array(cuts) / M, levels)
    target = dist.as_density()
    argmin = fit.normalized() if fit.total_mass > 0 else PiecewiseDensity.uniform()
    upper = l1_distance(target, argmin)

    partitions = {tuple(cuts)}
    n_parts = sum(math.comb(M - 1, j) for j in range(k))
    if n_parts <= EXHAUSTIVE_PARTITIONS and upper > lower + 1e-12:
        for j in range(k):
            for inner in itertools.combinations(range(1, M), j):
                partitions.add((0, *inner, M))
    elif M <= LAGRANGE_MAX_GRID and upper > lower + 1e-12:
        lams = np.linspace(-1, 1, LAGRANGE_STEPS + 2)[1:-1]
        for cost in _penalized_costs(d, lams):
            partitions.add(tuple(_dp(cost, k)[1]))
    if upper > lower + 1e-12:
        for part in sorted(partitions):
            cand = _constrained_refit(d, list(part))
            dist_c = l1_distance(target, cand)
            if dist_c < upper:
                argmin, upper = cand, dist_c
    return OptKResult(lower, max(upper, lower), argmin, argmin.breakpoints)


def max_disjoint_run_sum(seq, ell: int) -> float:
    """Largest total of at most ell disjoint contiguous runs of seq (0 if none positive)."""
    if ell < 1:
        raise ContractViolation("ell must be at least 1")
    x = np.asarray(seq, dtype=float)
    if len(x) == 0:
        return 0.0
    if ell == 1:
        csum = np.concatenate([[0.0], np.cumsum(x)])
        return float(max(0.0, np.max(csum - np.minimum.accumulate(csum))))
    # merge same-sign neighbours; optimal runs never split them
    sign = np.sign(x)
    x = x[sign != 0]
    if len(x) == 0:
        return 0.0
    brk = np.flatnonzero(np.diff(np.sign(x)) != 0) + 1
    runs = np.add.reduceat(x, np.concatenate([[0], brk])).tolist()
    # open[j]: best total using j runs with the j-th still open; closed[j]: all closed
    neg = -math.inf
    open_ = [neg] * (ell + 1)
    closed = [0.0] + [neg] * ell
    for v in runs:
        for j in range(ell, 0, -1):
            o = max(open_[j], closed[j - 1]) + v
            open_[j] = o
            if o > closed[j]:
                closed[j] = o
    return float(max(0.0, max(closed)))


def _signed_sup(seq, ell: int) -> float:
    seq = np.asarray(seq, dtype=float)
    return max(max_disjoint_run_sum(seq, ell), max_disjoint_run_sum(-seq, ell))


def a_ell_distance(f: PiecewiseDensity, g: PiecewiseDensity, ell: int) -> float:
    """sup over unions A of at most ell intervals of |f(A) - g(A)|."""
    edges, fv, gv = common_refinement(f, g)
    return _signed_sup((fv - gv) * np.diff(edges), ell)


def a_ell_to_sample(f: PiecewiseDensity, sample: EmpiricalSample, ell: int) -> float:
    """A_ell distance between f and an empirical distribution.

    The signed measure alternates between f's mass on each gap between
    distinct sample values and minus the empirical weight of each value.
    """
    vals, counts = np.unique(sample.points, return_counts=True)
    cdf = np.asarray(f.cdf(np.concatenate([[0.0], vals, [1.0]])))
    gaps = np.diff(cdf)
    seq = np.empty(2 * len(vals) + 1)
    seq[0::2] = gaps
    seq[1::2] = -counts / sample.m
    return _signed_sup(seq, ell)


def vc_concentration_probe(f: PiecewiseDensity, m: int, ell: int, trials: int, rng: np.random.Generator) -> float:
    """Monte Carlo mean of the A_ell distance between f and m-point empirical samples."""
    tot = 0.0
    for _ in range(trials):
        tot += a_ell_to_sample(f, EmpiricalSample(draw_points(f, m, rng)), ell)
    return tot / trials


def quad_mass(f: PiecewiseDensity, lo: float, hi: float) -> float:
    """Numeric integral of f over [lo, hi) with its breakpoints as hints."""
    pts = [b for b in f.breakpoints.tolist() if lo < b < hi]
    val, _ = integrate.quad(lambda x: float(f.pdf(x)), lo, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def quad_l1(f: PiecewiseDensity, g: PiecewiseDensity, lo: float = 0.0, hi: float = 1.0) -> float:
    """Numeric integral of |f - g| over [lo, hi); piecewise exact per subinterval."""
    edges = np.union1d(f.breakpoints, g.breakpoints)
    edges = np.unique(np.clip(np.concatenate([[lo, hi], edges]), lo, hi))
    total = 0.0
    for a, b in zip(edges[:-1].tolist(), edges[1:].tolist()):
        val, _ = integrate.quad(lambda x: abs(float(f.pdf(x)) - float(g.pdf(x))), a, b, epsabs=1e-14, epsrel=1e-12)
        total += val
    return total
