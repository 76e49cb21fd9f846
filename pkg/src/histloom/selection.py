"""Hypothesis selection and the reduction that drops the small-opt assumption."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import ContractViolation, PiecewiseDensity, common_refinement
from .learner import LearnerConfig, learn_wb
from .sources import SampleSource

C3 = 4
REPETITIONS = 3
# learn_wb needs eps < 1 and log2(1/eps) > 0; higher guesses are clamped here
MAX_RUNG_EPS = 0.5


@dataclass
class CandidatePool:
    hypotheses: list[PiecewiseDensity]
    labels: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if not self.hypotheses:
            raise ContractViolation("candidate pool is empty")
        for h in self.hypotheses:
            if not h.is_full_distribution:
                raise ContractViolation("every candidate must be a full distribution")
        if not self.labels:
            self.labels = [{} for _ in self.hypotheses]

    def __len__(self):
        return len(self.hypotheses)

    def to_json(self) -> list[dict]:
        return [{"label": lab, **h.to_dict()} for h, lab in zip(self.hypotheses, self.labels)]

    @classmethod
    def from_json(cls, items: list[dict]) -> "CandidatePool":
        return cls(
            [PiecewiseDensity.from_dict(it) for it in items],
            [dict(it.get("label", {})) for it in items],
        )


def scheffe_set(f: PiecewiseDensity, g: PiecewiseDensity) -> tuple[np.ndarray, np.ndarray]:
    """{x : f(x) > g(x)} as sorted disjoint intervals (lo, hi)."""
    edges, fv, gv = common_refinement(f, g)
    mask = fv > gv
    if not mask.any():
        return np.empty(0), np.empty(0)
    d = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1)
    return edges[starts], edges[stops]


def union_mass(r, lo: np.ndarray, hi: np.ndarray) -> float:
    if len(lo) == 0:
        return 0.0
    return float(np.sum(np.asarray(r.cdf(hi)) - np.asarray(r.cdf(lo))))


def scheffe_sample_size(n_candidates: int, eps: float, delta: float, c3: float = C3) -> int:
    return math.ceil(c3 / eps**2 * (math.log(n_candidates) + math.log(1.0 / delta)))


@dataclass
class TournamentResult:
    winner: int
    wins: np.ndarray
    draws: int


def scheffe_tournament(pool: CandidatePool, points) -> TournamentResult:
    """Pairwise-win tournament against a fixed sample.

    Every ordered pair (i, j) is one match on A_ij = {p_i > p_j}: i wins when
    p_i(A_ij) is at least as close to the empirical mass as p_j(A_ij) is.
    Candidate masses are exact; only the target's mass is estimated.
    """
    xs = np.sort(np.asarray(points, dtype=float))
    n = len(xs)
    N = len(pool)
    wins = np.zeros(N, dtype=int)
    hyps = pool.hypotheses
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            lo, hi = scheffe_set(hyps[i], hyps[j])
            emp = (np.searchsorted(xs, hi).sum() - np.searchsorted(xs, lo).sum()) / n if len(lo) else 0.0
            di = abs(union_mass(hyps[i], lo, hi) - emp)
            dj = abs(union_mass(hyps[j], lo, hi) - emp)
            if di <= dj:
                wins[i] += 1
            else:
                wins[j] += 1
    return TournamentResult(int(np.argmax(wins)), wins, n)


def scheffe_select(pool: CandidatePool, source: SampleSource, eps: float, delta: float, c3: float = C3) -> int:
    """Index of the tournament winner; ties go to the lowest index."""
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ContractViolation("eps and delta must lie in (0, 1)")
    if len(pool) == 1:
        return 0
    s = scheffe_sample_size(len(pool), eps, delta, c3)
    pts = source.draw(s, label="scheffe")
    return scheffe_tournament(pool, pts).winner


def guess_ladder(eps: float) -> list[float]:
    """Guesses (eps/10) * 2^(i-1) for i = 1 .. ceil(log2(20/eps))."""
    if not 0.0 < eps < 1.0:
        raise ContractViolation("eps must lie in (0, 1)")
    n = math.ceil(math.log2(20.0 / eps))
    return [eps / 10.0 * 2.0 ** (i - 1) for i in range(1, n + 1)]


@dataclass
class AgnosticRun:
    hypothesis: PiecewiseDensity
    pool: CandidatePool
    winner: int
    ladder: list[float]
    draws: int


def agnostic_learn_detailed(
    k: int,
    eps: float,
    source: SampleSource,
    repetitions: int = REPETITIONS,
    delta: float = 1.0 / 40.0,
    c3: float = C3,
    **learner_kw,
) -> AgnosticRun:
    if k < 1:
        raise ContractViolation("k must be at least 1")
    ladder = guess_ladder(eps)
    start = source.draws
    hyps, labels = [], []
    for i, g in enumerate(ladder, start=1):
        cfg = LearnerConfig(k=k, eps=min(g, MAX_RUNG_EPS), **learner_kw)
        for rep in range(repetitions):
            hyps.append(learn_wb(cfg, source))
            labels.append({"guess": i, "g": g, "rep": rep})
    pool = CandidatePool(hyps, labels)
    winner = scheffe_select(pool, source, eps / 10.0, delta, c3)
    return AgnosticRun(pool.hypotheses[winner], pool, winner, ladder, source.draws - start)


def agnostic_learn(k: int, eps: float, source: SampleSource, **kw) -> PiecewiseDensity:
    """Histogram with error O(opt_k) + eps without assuming opt_k is small."""
    return agnostic_learn_detailed(k, eps, source, **kw).hypothesis


def agnostic_budget(k: int, eps: float, repetitions: int = REPETITIONS, delta: float = 1 / 40, c3: float = C3, **learner_kw) -> int:
    """Upper bound on the draws agnostic_learn takes from a non-rejecting source."""
    ladder = guess_ladder(eps)
    per_rung = sum(LearnerConfig(k=k, eps=min(g, MAX_RUNG_EPS), **learner_kw).draw_budget for g in ladder)
    return repetitions * per_rung + scheffe_sample_size(repetitions * len(ladder), eps / 10.0, delta, c3)
