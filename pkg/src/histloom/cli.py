"""Command-line entry point: ``histloom <command> [options]``.

Every command accepts ``--seed`` and ``--json``.  Randomness for target
generation and for sampling come from separate streams derived from the seed,
so a run is reproducible from its command line and input files alone.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import io as hio
from .atoms import C4, learn_with_atoms
from .bench import REPEATS, run_grid, summarize, to_csv
from .density import AtomicMixture, ContractViolation, DiscreteDistribution, PiecewiseDensity, discretize, l1_distance
from .learner import C1, C2, LearnerConfig, learner_trace
from .lowerbound import agnostic_floor_demo, distinguishing_experiment
from .oracles import a_ell_distance, opt_k_exact
from .partition import C0
from .selection import C3, CandidatePool, agnostic_budget, agnostic_learn, scheffe_tournament, scheffe_sample_size
from .sources import ArraySource, DistributionSource, PathologicalTarget, SampleExhausted, derive_seed
from .targets import TargetSpec, generate_target


class UsageError(Exception):
    pass


def threads() -> int:
    """Parallelism cap from HISTLOOM_THREADS; every command here runs serially."""
    raw = os.environ.get("HISTLOOM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"HISTLOOM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("HISTLOOM_THREADS must be at least 1")
    return n


def _check_k_eps(k: int, eps: float) -> None:
    if k < 1:
        raise UsageError("--k must be at least 1")
    if not 0.0 < eps < 1.0:
        raise UsageError("--eps must lie in (0, 1)")


def _emit(args, doc: dict, human: list[str]) -> None:
    if args.json:
        sys.stdout.write(hio.dumps(doc))
    else:
        print("\n".join(human))


def _load_target(text: str, seed: int):
    return generate_target(TargetSpec.parse(text), derive_seed(seed, 0))


def _sample_source(args):
    if args.input:
        return ArraySource(hio.read_samples(args.input)), None
    if not args.target:
        raise UsageError("give --target or --input")
    gen = _load_target(args.target, args.seed)
    return DistributionSource(gen.target, derive_seed(args.seed, 1)), gen


def _load_density(path_or_spec: str, seed: int):
    if Path(path_or_spec).exists():
        return hio.read_hypothesis(path_or_spec), None
    gen = _load_target(path_or_spec, seed)
    return gen.target, gen


# -- learn ---------------------------------------------------------------


def cmd_learn(args) -> int:
    _check_k_eps(args.k, args.eps)
    fast = args.assume_small_opt and args.assume_well_behaved
    kw = dict(c0=args.c0, c1=args.c1, c2=args.c2)
    if args.m is not None:
        kw["m"] = args.m
    if args.m0 is not None:
        kw["m0"] = args.m0
    try:
        cfg = LearnerConfig(k=args.k, eps=args.eps, **kw)
    except ContractViolation as e:
        raise UsageError(str(e)) from None
    source, gen = _sample_source(args)
    if isinstance(source, ArraySource):
        need = cfg.draw_budget if fast else agnostic_budget(args.k, args.eps, c3=args.c3, **kw)
        if len(source.points) < need:
            raise hio.InputError(
                f"insufficient samples for budget m: {args.input} has {len(source.points)} values, "
                f"the run needs {need}"
            )
    t0 = time.perf_counter()
    trace = None
    if fast:
        trace = learner_trace(cfg, source)
        h = trace.hypothesis
    elif args.assume_well_behaved:
        h = agnostic_learn(args.k, args.eps, source, c3=args.c3, **kw)
    else:
        h = learn_with_atoms(args.k, args.eps, source, assume_small_opt=args.assume_small_opt, c4=args.c4, **kw)
    wall = time.perf_counter() - t0
    hist = h.histogram if isinstance(h, AtomicMixture) else h
    doc = {
        "command": "learn",
        "k": args.k,
        "eps": args.eps,
        "seed": args.seed,
        "mode": "learn_wb" if fast else "full",
        "draws": int(source.draws),
        "pieces": int(hist.pieces),
        "piece_bound": cfg.piece_bound,
        "hypothesis": h.to_dict(),
    }
    if args.output:
        Path(args.output).write_text(hio.dumps(doc))
    if args.trace:
        if trace is None:
            raise UsageError("--trace needs the learn_wb path (--assume-small-opt --assume-well-behaved)")
        Path(args.trace).write_text(trace.to_jsonl())
    print(f"draws={source.draws} pieces={hist.pieces} wall={wall:.3f}s", file=sys.stderr)
    if args.json or not args.output:
        sys.stdout.write(hio.dumps(doc))
    return 0


# -- select --------------------------------------------------------------


def cmd_select(args) -> int:
    if not 0.0 < args.eps < 1.0 or not 0.0 < args.delta < 1.0:
        raise UsageError("--eps and --delta must lie in (0, 1)")
    try:
        items = json.loads(Path(args.candidates).read_text())
        pool = CandidatePool.from_json(items)
    except json.JSONDecodeError as e:
        raise hio.InputError(f"{args.candidates}:{e.lineno}: invalid JSON: {e.msg}") from None
    except (KeyError, TypeError) as e:
        raise hio.InputError(f"{args.candidates}: bad candidate list: {e}") from None
    source, _ = _sample_source(args)
    n = scheffe_sample_size(len(pool), args.eps, args.delta, args.c3) if len(pool) > 1 else 0
    pts = source.draw(n, label="scheffe")
    res = scheffe_tournament(pool, pts) if n else None
    winner = res.winner if res else 0
    doc = {
        "command": "select",
        "winner": winner,
        "label": pool.labels[winner],
        "wins": res.wins.tolist() if res else [0],
        "draws": n,
    }
    _emit(args, doc, [f"winner={winner} draws={n}", f"wins={doc['wins']}"])
    return 0


# -- eval ----------------------------------------------------------------


def cmd_eval(args) -> int:
    h = hio.read_hypothesis(args.hypothesis)
    if isinstance(h, AtomicMixture) and not len(h.atoms):
        h = h.histogram
    other, gen = _load_density(args.against, args.seed)
    if isinstance(other, DiscreteDistribution):
        hd = h.histogram if isinstance(h, AtomicMixture) else h
        l1 = float(discretize(hd, other.M).l1(other))
    else:
        l1 = l1_distance(h, other)
    doc: dict = {"command": "eval", "l1": l1, "tv": l1 / 2.0, "a_ell": {}}
    for ell in args.ell:
        if ell < 1:
            raise UsageError("--ell must be at least 1")
        if isinstance(h, PiecewiseDensity) and isinstance(other, PiecewiseDensity):
            doc["a_ell"][str(ell)] = a_ell_distance(h, other, ell)
    if gen is not None:
        doc["target"] = gen.metadata()
    lines = [f"l1={l1:.10g}", f"tv={l1 / 2:.10g}"]
    lines += [f"a_{e}={v:.10g}" for e, v in doc["a_ell"].items()]
    if gen is not None:
        lines.append(f"opt_k<={gen.opt_upper:g} (certified, k={gen.k})")
    _emit(args, doc, lines)
    return 0


# -- oracle --------------------------------------------------------------


def cmd_optk(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    p, _ = _load_density(args.density, args.seed)
    if isinstance(p, AtomicMixture):
        raise UsageError("opt_k oracle needs an atom-free density")
    res = opt_k_exact(p, args.k)
    doc = {"command": "oracle optk", "k": args.k, **res.to_dict()}
    _emit(args, doc, [f"lower={res.lower:.10g}", f"upper={res.upper:.10g}"])
    return 0


def cmd_adist(args) -> int:
    if args.ell < 1:
        raise UsageError("--ell must be at least 1")
    f, _ = _load_density(args.f, args.seed)
    g, _ = _load_density(args.g, args.seed)
    if not (isinstance(f, PiecewiseDensity) and isinstance(g, PiecewiseDensity)):
        raise UsageError("adist needs two piecewise densities")
    d = a_ell_distance(f, g, args.ell)
    doc = {"command": "oracle adist", "ell": args.ell, "a_ell": d, "half_l1": l1_distance(f, g) / 2}
    _emit(args, doc, [f"a_{args.ell}={d:.10g}"])
    return 0


# -- bench ---------------------------------------------------------------


def cmd_bench(args) -> int:
    if not (args.k and args.eps and args.m):
        raise UsageError("benchmark grid is empty")
    for k in args.k:
        for e in args.eps:
            _check_k_eps(k, e)
    cells = run_grid(args.k, args.eps, args.m, args.seed, args.repeats)
    if args.csv:
        Path(args.csv).write_text(to_csv(cells))
    summ = summarize(cells)
    doc = {"command": "bench", "repeats": args.repeats, "threads": threads(), **summ}
    lines = [to_csv(cells).rstrip()]
    for g in summ["groups"]:
        if "slope" in g:
            lines.append(f"k={g['k']} eps={g['eps']} slope={g['slope']:.3f} max_ratio={g['max_ratio']:.3f}")
    _emit(args, doc, lines)
    return 0


# -- lowerbound ----------------------------------------------------------


def cmd_lowerbound(args) -> int:
    rng = derive_seed(args.seed, 2)
    if args.delta is not None:
        doc = {"command": "lowerbound", "mode": "floor", **agnostic_floor_demo(args.N, args.delta, args.m, args.trials, rng)}
        _emit(args, doc, [f"{k}={v}" for k, v in doc.items()])
        return 0
    rep = distinguishing_experiment(args.N, args.t, args.m, args.trials, args.distinguisher, rng, eps=args.eps)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("regime,trial,statistic\n")
            for regime, i, s in rep.csv_rows():
                fh.write(f"{regime},{i},{s:.17g}\n")
    doc = {"command": "lowerbound", "mode": "distinguish", **rep.to_dict()}
    _emit(
        args,
        doc,
        [f"rate_uniform={rep.rate_uniform:.4f}", f"rate_hard={rep.rate_hard:.4f}", f"advantage={rep.advantage:.4f}"],
    )
    return 0


# -- synth ---------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    gen = _load_target(args.target, args.seed)
    src = DistributionSource(gen.target, derive_seed(args.seed, 1))
    xs = src.draw(args.n)
    if args.output:
        hio.write_samples(args.output, xs, binary=args.binary)
    if args.density_out and not isinstance(gen.target, DiscreteDistribution):
        Path(args.density_out).write_text(hio.dumps(gen.target.to_dict()))
    doc = {"command": "synth", "target": args.target, "n": args.n, **gen.metadata()}
    _emit(args, doc, [f"wrote {args.n} samples" + (f" to {args.output}" if args.output else "")])
    return 0


# -- parser --------------------------------------------------------------


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v]


def _ints(s: str) -> list[int]:
    return [int(float(v)) for v in s.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    consts = argparse.ArgumentParser(add_help=False)
    consts.add_argument("--c0", type=float, default=C0)
    consts.add_argument("--c1", type=float, default=C1)
    consts.add_argument("--c2", type=float, default=C2)
    consts.add_argument("--c3", type=float, default=C3)
    consts.add_argument("--c4", type=float, default=C4)

    p = argparse.ArgumentParser(prog="histloom", description="Variable-width histogram learning.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("learn", parents=[common, consts], help="learn a histogram from samples")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--target", help="synthetic target spec, e.g. kflat:k=5")
    s.add_argument("--input", help="sample file (text or HLS1 binary)")
    s.add_argument("--output", help="write the result JSON here")
    s.add_argument("--trace", help="write per-pass merge states as JSONL")
    s.add_argument("--m", type=int, help="override the main sample size")
    s.add_argument("--m0", type=int, help="override the partitioning sample size")
    s.add_argument("--assume-small-opt", action="store_true")
    s.add_argument("--assume-well-behaved", action="store_true")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("select", parents=[common, consts], help="Scheffe tournament over candidate histograms")
    s.add_argument("--candidates", required=True, help="JSON list of histograms")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--target")
    s.add_argument("--input")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("eval", parents=[common], help="distances between a hypothesis and a reference")
    s.add_argument("--hypothesis", required=True)
    s.add_argument("--against", required=True, help="JSON file or target spec")
    s.add_argument("--ell", type=int, action="append", default=[])
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("oracle", help="exact reference computations")
    osub = s.add_subparsers(dest="oracle", required=True)
    o = osub.add_parser("optk", parents=[common], help="bracket opt_k by dynamic programming")
    o.add_argument("--density", required=True, help="JSON file or target spec")
    o.add_argument("--k", type=int, required=True)
    o.set_defaults(func=cmd_optk)
    o = osub.add_parser("adist", parents=[common], help="A_ell distance between two densities")
    o.add_argument("--f", required=True)
    o.add_argument("--g", required=True)
    o.add_argument("--ell", type=int, required=True)
    o.set_defaults(func=cmd_adist)

    s = sub.add_parser("bench", parents=[common], help="time learn_wb over a (k, eps, m) grid")
    s.add_argument("--k", type=_ints, default=[10])
    s.add_argument("--eps", type=_floats, default=[0.1])
    s.add_argument("--m", type=_ints, default=[10**4, 10**5, 10**6])
    s.add_argument("--repeats", type=int, default=REPEATS)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("lowerbound", parents=[common], help="distinguishing experiments on the hard ensemble")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--t", type=str, default="0.25")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--distinguisher", choices=["collision", "learner"], default="collision")
    s.add_argument("--eps", type=float, help="accuracy for the learner distinguisher")
    s.add_argument("--delta", type=float, help="run the agnostic floor demo at this delta")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_lowerbound)

    s = sub.add_parser("synth", parents=[common], help="draw samples from a synthetic target")
    s.add_argument("--target", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--output")
    s.add_argument("--binary", action="store_true")
    s.add_argument("--density-out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads()
        return args.func(args)
    except (UsageError, ContractViolation) as e:
        parser.error(str(e))
    except (hio.InputError, SampleExhausted, PathologicalTarget, FileNotFoundError) as e:
        print(f"histloom: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
