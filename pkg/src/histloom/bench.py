"""Wall-time benchmark of learn_wb over a grid of (k, eps, m).

Each cell draws real points (the multinomial shortcut is off) so the timing
covers sampling, binning and the merge loop.  One untimed warm-up run
precedes the timed repetitions; the reported time is their median.
"""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .density import ContractViolation
from .learner import LearnerConfig, learn_wb
from .sources import DistributionSource, derive_seed
from .targets import generate_target

REPEATS = 5


@dataclass(frozen=True)
class BenchCell:
    k: int
    eps: float
    m: int | None
    seconds: float
    draws: int
    pieces: int


def time_cell(k: int, eps: float, m: int | None, seed: int = 0, repeats: int = REPEATS) -> BenchCell:
    target = generate_target(f"kflat:k={k}", derive_seed(seed, k)).target
    cfg = LearnerConfig(k=k, eps=eps, m=m)
    learn_wb(cfg, DistributionSource(target, derive_seed(seed, k, 0), exact_binning=False))
    times = []
    for r in range(repeats):
        src = DistributionSource(target, derive_seed(seed, k, r + 1), exact_binning=False)
        t0 = time.perf_counter()
        h = learn_wb(cfg, src)
        times.append(time.perf_counter() - t0)
    return BenchCell(k, eps, cfg.sample_size, float(np.median(times)), src.draws, h.pieces)


def run_grid(ks, epss, ms, seed: int = 0, repeats: int = REPEATS) -> list[BenchCell]:
    grid = list(itertools.product(ks, epss, ms))
    if not grid:
        raise ContractViolation("benchmark grid is empty")
    return [time_cell(k, e, m, seed, repeats) for k, e, m in grid]


def loglog_slope(ms, seconds) -> float:
    """Least-squares slope of log(time) against log(m)."""
    ms = np.asarray(ms, dtype=float)
    if len(np.unique(ms)) < 2:
        raise ContractViolation("need at least two distinct m values for a slope")
    return float(np.polyfit(np.log(ms), np.log(np.asarray(seconds, dtype=float)), 1)[0])


def summarize(cells: list[BenchCell]) -> dict:
    """Per (k, eps) group: the log-log slope and the largest successive time ratio."""
    groups: dict[tuple[int, float], list[BenchCell]] = {}
    for c in cells:
        groups.setdefault((c.k, c.eps), []).append(c)
    out = []
    for (k, eps), cs in sorted(groups.items()):
        cs = sorted(cs, key=lambda c: c.m)
        row = {"k": k, "eps": eps, "m": [c.m for c in cs], "seconds": [c.seconds for c in cs]}
        if len({c.m for c in cs}) >= 2:
            row["slope"] = loglog_slope(row["m"], row["seconds"])
            row["max_ratio"] = max(b.seconds / a.seconds for a, b in zip(cs, cs[1:]))
        out.append(row)
    return {"groups": out}


def to_csv(cells: list[BenchCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "eps", "m", "seconds", "draws", "pieces"])
    for c in cells:
        w.writerow([c.k, c.eps, c.m, f"{c.seconds:.6f}", c.draws, c.pieces])
    return buf.getvalue()
