"""Command-line surface.

Commands: gen, balance, sparsify, verify, bench, diag.  Exit codes are a
stable contract: 0 success, 1 verification failure, 2 usage error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import serialize
from .balancer import DEFAULT_MAX_ITERS, DEFAULT_SUPPORT_EPS, DEFAULT_TOL, balance
from .bench import BenchConfig, run_bench
from .errors import HsparseError, InvalidHypergraphError
from .hypergraph import Hypergraph, random_hypergraph
from .sampler import DEFAULT_SAMPLE_CONSTANT, build_plan, draw, sample_count
from .verifier import (
    MAX_EXHAUSTIVE_CUT_VERTICES,
    chaining_diagnostics,
    cut_error_exhaustive,
    empirical_epsilon,
    norm_domination_check,
    symmetrized_fluctuation,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _seed(text: str) -> int:
    """64-bit unsigned seed, decimal or 0x-hex."""
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _emit(doc: dict, fmt: str) -> None:
    if fmt == "csv":
        keys = [k for k, v in doc.items() if not isinstance(v, (list, dict))]
        print(",".join(keys))
        print(",".join(repr(doc[k]) if isinstance(doc[k], float) else str(doc[k]) for k in keys))
    else:
        print(json.dumps(doc, indent=1))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=0, help="64-bit seed (decimal or 0x-hex)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def cmd_gen(args: argparse.Namespace) -> int:
    hg = random_hypergraph(
        args.n, args.m, args.max_card, (args.w_min, args.w_max), seed=args.seed
    )
    serialize.save(hg, args.out)
    print(f"n={hg.n} m={hg.num_edges} max_card={hg.rank}")
    return EXIT_OK


def cmd_balance(args: argparse.Namespace) -> int:
    hg = serialize.load(args.input)
    split, report = balance(
        hg, tol=args.tol, max_iters=args.max_iters, support_eps=args.support_eps
    )
    if not report.converged:
        print("warning: balance did not converge within the iteration budget", file=sys.stderr)
    doc = {
        "converged": report.converged,
        "iterations": report.iterations,
        "kkt_ratio": report.kkt_ratio,
        "mass": report.resistance_mass,
        "objective": report.objective_trace[-1],
        "support_eps": report.support_eps,
    }
    if args.out:
        pairs = hg.expansion.pairs
        artifact = {
            "n": hg.n,
            "pairs": pairs.tolist(),
            "aggregate": split.aggregate().values.tolist(),
            "per_coordinate": {
                "pair": split.coordinate_pairs().tolist(),
                "values": split.values.tolist(),
            },
            "report": doc,
        }
        serialize.save_json(artifact, args.out)
    _emit(doc, args.format)
    return EXIT_OK


def cmd_sparsify(args: argparse.Namespace) -> int:
    hg = serialize.load(args.input)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    split, report = balance(
        hg, tol=args.tol, max_iters=args.max_iters, support_eps=args.support_eps
    )
    if not report.converged:
        print("warning: balance did not converge; proceeding with best split", file=sys.stderr)
    timings["balance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    plan = build_plan(hg, split)
    if args.M is not None:
        num = args.M
    else:
        num = sample_count(hg.n, hg.rank, plan.mass, args.epsilon, args.constant_c)
    timings["plan"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sp = draw(hg, plan, num, args.seed)
    sparsified = sp.as_hypergraph()
    timings["draw"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err = empirical_epsilon(hg, sparsified, args.num_random, args.seed ^ 0x5EED)
    cut_eps = (
        cut_error_exhaustive(hg, sparsified)
        if hg.n <= MAX_EXHAUSTIVE_CUT_VERTICES
        else None
    )
    timings["verify"] = time.perf_counter() - t0

    out = Path(args.out)
    sparsified = Hypergraph(
        n=sparsified.n,
        edges=sparsified.edges,
        meta={
            "source": str(args.input),
            "seed": args.seed,
            "num_samples": num,
            "constant": args.constant_c,
            "epsilon": args.epsilon,
            "tol": args.tol,
        },
    )
    serialize.save(sparsified, out)
    record = {
        "schema": "hsparse-run v1",
        "n": hg.n,
        "m": hg.num_edges,
        "max_card": hg.rank,
        "epsilon": args.epsilon,
        "constant": args.constant_c,
        "tol": args.tol,
        "support_eps": args.support_eps,
        "seed": args.seed,
        "M": num,
        "M_overridden": args.M is not None,
        "distinct_edges": sp.num_distinct,
        "kkt_ratio": report.kkt_ratio,
        "mass": report.resistance_mass,
        "objective": report.objective_trace[-1],
        "converged": report.converged,
        "empirical_eps": err.max_relative_error,
        "cut_eps": cut_eps,
        "probabilities": plan.probabilities.tolist(),
        "timings": timings,
    }
    serialize.save_json(record, out.with_suffix(".run.json"))
    _emit(
        {
            "out": str(out),
            "M": num,
            "distinct_edges": sp.num_distinct,
            "empirical_eps": err.max_relative_error,
            "kkt_ratio": report.kkt_ratio,
            "converged": report.converged,
        },
        args.format,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    hg = serialize.load(args.input)
    other = serialize.load(args.sparsifier)
    if hg.n != other.n:
        print(f"error: vertex counts differ ({hg.n} vs {other.n})", file=sys.stderr)
        return EXIT_USAGE
    report = empirical_epsilon(hg, other, args.num_random, args.seed)
    doc = {
        "empirical_eps": report.max_relative_error,
        "target": args.epsilon,
        "argmax_kind": report.argmax_kind,
        "num_directions": report.num_directions,
        "exhaustive_cuts": report.exhaustive_cuts,
    }
    if report.exhaustive_cuts:
        doc["cut_eps"] = cut_error_exhaustive(hg, other)
    doc["pass"] = report.max_relative_error <= args.epsilon
    _emit(doc, args.format)
    return EXIT_OK if doc["pass"] else EXIT_VERIFY_FAIL


def cmd_bench(args: argparse.Namespace) -> int:
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        config = BenchConfig.from_dict(doc)
        if args.out:
            config = BenchConfig.from_dict({**doc, "out": args.out})
    else:
        if not (args.ns and args.ms and args.max_cards and args.epsilons):
            print(
                "error: provide --config or all of --ns/--ms/--max-cards/--epsilons",
                file=sys.stderr,
            )
            return EXIT_USAGE
        config = BenchConfig(
            ns=args.ns,
            ms=args.ms,
            max_cards=args.max_cards,
            epsilons=args.epsilons,
            trials=args.trials,
            constant=args.constant_c,
            tol=args.tol,
            num_random=args.num_random,
            seed=args.seed,
            out=args.out,
        )
    records = run_bench(config)
    failures = sum(r.status != "ok" for r in records)
    print(f"completed {len(records)} runs ({failures} marked failures); output: {config.out}")
    return EXIT_OK


def cmd_diag(args: argparse.Namespace) -> int:
    hg = serialize.load(args.input)
    split, report = balance(
        hg, tol=args.tol, max_iters=args.max_iters, support_eps=args.support_eps
    )
    plan = build_plan(hg, split)
    num = args.M or sample_count(hg.n, hg.rank, plan.mass, args.epsilon, args.constant_c)
    sp = draw(hg, plan, num, args.seed)
    diag = chaining_diagnostics(
        hg, split, plan, sp.edge_indices, args.num_gaussians, args.seed ^ 0xD1A6
    )
    dom = norm_domination_check(hg, split, args.num_random, args.seed ^ 0x0D03)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed ^ 0x51F))
    direction = rng.standard_normal(hg.n)
    direction -= direction.mean()
    sign_mean, sign_se = symmetrized_fluctuation(hg, plan, sp, direction, seed=args.seed)
    doc = {
        "converged": report.converged,
        "kkt_ratio": report.kkt_ratio,
        "mass": plan.mass,
        "M": num,
        "max_row_norm": diag.max_row_norm,
        "max_gauss_norm": diag.max_gauss_norm,
        "max_gauss_norm_se": diag.max_gauss_norm_se,
        "peak_rms_gauss_norm": diag.peak_rms_gauss_norm,
        "peak_rms_gauss_norm_se": diag.peak_rms_gauss_norm_se,
        "norm_domination_ok": dom.ok,
        "norm_domination_worst_ratio": dom.worst_ratio,
        "sign_fluctuation_mean": sign_mean,
        "sign_fluctuation_se": sign_se,
    }
    _emit(doc, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsparse",
        description="Spectral hypergraph sparsification by balanced resistances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random hypergraph file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-card", type=int, required=True)
    p.add_argument("--w-min", type=float, default=1.0)
    p.add_argument("--w-max", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("balance", help="balance conductances and report the certificate")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--support-eps", type=float, default=DEFAULT_SUPPORT_EPS)
    p.add_argument("--out", help="optional JSON artifact with the split")
    _add_common(p)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("sparsify", help="balance, sample, and write a sparsifier")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--constant-C", dest="constant_c", type=float, default=DEFAULT_SAMPLE_CONSTANT)
    p.add_argument("--M", type=int, default=None, help="override the sample-count rule")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--support-eps", type=float, default=DEFAULT_SUPPORT_EPS)
    p.add_argument("--num-random", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("verify", help="measure empirical error of a sparsifier")
    p.add_argument("input")
    p.add_argument("sparsifier")
    p.add_argument("--epsilon", type=float, required=True, help="target relative error")
    p.add_argument("--num-random", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a reproducible sweep to CSV")
    p.add_argument("--config", help="JSON file with BenchConfig fields")
    p.add_argument("--ns", type=_int_list, default=None)
    p.add_argument("--ms", type=_int_list, default=None)
    p.add_argument("--max-cards", type=_int_list, default=None)
    p.add_argument("--epsilons", type=_float_list, default=None)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--constant-C", dest="constant_c", type=float, default=DEFAULT_SAMPLE_CONSTANT)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--num-random", type=int, default=1000)
    p.add_argument("--out", help="CSV output path (appended, resumable)")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("diag", help="balance and report sampling diagnostics")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--support-eps", type=float, default=DEFAULT_SUPPORT_EPS)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--constant-C", dest="constant_c", type=float, default=DEFAULT_SAMPLE_CONSTANT)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--num-gaussians", type=int, default=400)
    p.add_argument("--num-random", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=cmd_diag)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidHypergraphError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HsparseError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
