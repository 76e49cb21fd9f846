"""Synthetic targets with certificates.

A spec string looks like ``kind:key=value;key=value``; list values are
comma separated.  Kinds and keys:

    uniform
    kflat               breaks=0.5;levels=1.5,0.5   or   k=5[;grid=64]
    kflat-plus-noise    k=2;eta=0.05[;grid=64;sub=4]
    monotone            pieces=16[;decreasing=1]
    unimodal            pieces=16[;mode=0.3]
    atom-mixture        atoms=0.5:0.3[,x:w...][;base=uniform|k=3]
    lowerbound          N=1000;t=0.25

Random choices (breakpoints, levels, subsets) come from the generator passed
to ``generate_target``.  All piecewise targets are aligned to a dyadic grid so
the DP oracle applies to them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .density import AtomicMixture, ContractViolation, DiscreteDistribution, PiecewiseDensity
from .lowerbound import HardInstance, as_fraction, sample_hard_instance

KINDS = ("uniform", "kflat", "kflat-plus-noise", "monotone", "unimodal", "atom-mixture", "lowerbound")

Target = Union[PiecewiseDensity, DiscreteDistribution, AtomicMixture]


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown target kind {self.kind!r}; expected one of {', '.join(KINDS)}")

    @classmethod
    def parse(cls, text: str) -> "TargetSpec":
        kind, _, rest = text.strip().partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(";"))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ContractViolation(f"bad target parameter {item!r}; expected key=value")
            params[key.strip()] = val.strip()
        return cls(kind.strip(), params)

    def __str__(self):
        body = ";".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}:{body}" if body else self.kind

    def get(self, key: str, default=None, conv=float):
        if key not in self.params:
            if default is None:
                raise ContractViolation(f"target {self.kind} needs parameter {key!r}")
            return default
        try:
            return conv(self.params[key])
        except (TypeError, ValueError) as e:
            raise ContractViolation(f"bad value for {key!r}: {self.params[key]!r}") from e

    def floats(self, key: str) -> list[float]:
        return [float(v) for v in str(self.params[key]).split(",") if v]


@dataclass
class GeneratedTarget:
    target: Target
    k: int | None = None
    opt_upper: float = 0.0
    breakpoints: list[float] | None = None
    atoms: list[tuple[float, float]] = field(default_factory=list)
    base: PiecewiseDensity | None = None
    instance: HardInstance | None = None

    def metadata(self) -> dict[str, Any]:
        out: dict[str, Any] = {"k": self.k, "opt_upper": self.opt_upper, "atoms": [list(a) for a in self.atoms]}
        if self.breakpoints is not None:
            out["breakpoints"] = list(self.breakpoints)
        return out


def _random_kflat(k: int, grid: int, rng: np.random.Generator) -> PiecewiseDensity:
    if not 1 <= k <= grid:
        raise ContractViolation(f"need 1 <= k <= grid, got k={k}, grid={grid}")
    inner = np.sort(rng.choice(np.arange(1, grid), size=k - 1, replace=False)) / grid
    edges = np.concatenate([[0.0], inner, [1.0]])
    levels = rng.uniform(0.2, 2.0, size=k)
    # adjacent pieces must differ, otherwise the target is really (k-1)-flat
    for i in range(1, k):
        while abs(levels[i] - levels[i - 1]) < 0.2:
            levels[i] = rng.uniform(0.2, 2.0)
    return PiecewiseDensity(edges, levels).normalized()


def add_noise(base: PiecewiseDensity, eta: float, sub: int = 4) -> PiecewiseDensity:
    """Split every piece into ``sub`` equal cells and add +-eta*level alternately.

    Each piece keeps its mass (``sub`` is even), so the base stays a valid
    distribution and its L1 distance to the result is exactly eta.
    """
    if not 0.0 <= eta < 1.0:
        raise ContractViolation("eta must lie in [0, 1)")
    if sub < 2 or sub % 2:
        raise ContractViolation("sub must be a positive even number")
    edges, vals = [], []
    sign = np.resize([1.0, -1.0], sub)
    for (lo, hi), v in zip(zip(base.breakpoints[:-1], base.breakpoints[1:]), base.values):
        edges.extend(np.linspace(lo, hi, sub + 1)[:-1].tolist())
        vals.extend((v * (1.0 + eta * sign)).tolist())
    return PiecewiseDensity(edges + [1.0], vals)


def _staircase(heights: np.ndarray) -> PiecewiseDensity:
    n = len(heights)
    return PiecewiseDensity(np.linspace(0.0, 1.0, n + 1), heights).normalized()


def _atoms(spec: TargetSpec) -> list[tuple[float, float]]:
    out = []
    for item in str(spec.params["atoms"]).split(","):
        x, _, w = item.partition(":")
        out.append((float(x), float(w)))
    return out


def generate_target(spec: TargetSpec | str, rng: np.random.Generator) -> GeneratedTarget:
    if isinstance(spec, str):
        spec = TargetSpec.parse(spec)
    kind = spec.kind
    if kind == "uniform":
        u = PiecewiseDensity.uniform()
        return GeneratedTarget(u, 1, 0.0, [0.0, 1.0])
    if kind == "kflat":
        if "levels" in spec.params:
            breaks = spec.floats("breaks") if "breaks" in spec.params else []
            levels = spec.floats("levels")
            if len(levels) != len(breaks) + 1:
                raise ContractViolation("kflat needs one more level than inner breakpoints")
            f = PiecewiseDensity([0.0, *breaks, 1.0], levels)
            if not f.is_full_distribution:
                raise ContractViolation(f"kflat levels integrate to {f.total_mass}, not 1")
        else:
            f = _random_kflat(spec.get("k", conv=int), spec.get("grid", 64, int), rng)
        return GeneratedTarget(f, f.pieces, 0.0, f.breakpoints.tolist())
    if kind == "kflat-plus-noise":
        k = spec.get("k", conv=int)
        eta = spec.get("eta")
        base = _random_kflat(k, spec.get("grid", 64, int), rng)
        f = add_noise(base, eta, spec.get("sub", 4, int))
        return GeneratedTarget(f, k, eta, base.breakpoints.tolist(), base=base)
    if kind == "monotone":
        n = spec.get("pieces", 16, int)
        h = np.sort(rng.uniform(0.1, 2.0, size=n))
        if spec.get("decreasing", 1, int):
            h = h[::-1]
        f = _staircase(h)
        return GeneratedTarget(f, f.pieces, 0.0, f.breakpoints.tolist())
    if kind == "unimodal":
        n = spec.get("pieces", 16, int)
        mode = spec.get("mode", 0.5)
        j = min(n - 1, max(0, int(mode * n)))
        up = np.sort(rng.uniform(0.1, 2.0, size=j + 1))
        down = np.sort(rng.uniform(0.1, up[-1], size=n - j - 1))[::-1]
        f = _staircase(np.concatenate([up, down]))
        return GeneratedTarget(f, f.pieces, 0.0, f.breakpoints.tolist())
    if kind == "atom-mixture":
        atoms = _atoms(spec)
        w = sum(a for _, a in atoms)
        if not 0.0 < w <= 1.0 or any(not 0.0 <= x < 1.0 for x, _ in atoms):
            raise ContractViolation("atoms need locations in [0, 1) and total mass in (0, 1]")
        if "k" in spec.params:
            base = _random_kflat(spec.get("k", conv=int), spec.get("grid", 64, int), rng)
        else:
            base = PiecewiseDensity.uniform()
        f = AtomicMixture(base.scaled(1.0 - w), [x for x, _ in atoms], [a for _, a in atoms])
        return GeneratedTarget(f, base.pieces, 0.0, base.breakpoints.tolist(), atoms, base=base)
    # lowerbound
    N = spec.get("N", conv=int)
    t = spec.get("t", conv=lambda v: as_fraction(Fraction(v)))
    inst = sample_hard_instance(N, t, rng)
    return GeneratedTarget(inst.distribution, 2, float(inst.exact_l1_to_witness()), instance=inst)
