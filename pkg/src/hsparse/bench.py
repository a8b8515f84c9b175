"""Benchmark sweep harness with reproducible seeds and CSV output.

A sweep runs the full pipeline (generate, balance, plan, size, draw, verify)
once per (cell, trial), where a cell is one combination of vertex count, edge
count, max cardinality, and target error.  Every random phase derives its
stream from the master seed and the (cell, trial) coordinates, so reruns
reproduce rows exactly and interrupted runs resume from the completed rows.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .balancer import DEFAULT_MAX_ITERS, DEFAULT_SUPPORT_EPS, DEFAULT_TOL, balance
from .hypergraph import Hypergraph, edge_energy_matrix, random_hypergraph
from .sampler import DEFAULT_SAMPLE_CONSTANT, SamplingPlan, build_plan, draw, sample_count
from .verifier import (
    MAX_EXHAUSTIVE_CUT_VERTICES,
    cut_error_exhaustive,
    empirical_epsilon,
    random_directions,
)

SCHEMA_COMMENT = "# hsparse-bench schema v1"

CSV_COLUMNS = [
    "n",
    "m",
    "max_card",
    "epsilon",
    "trial",
    "seed",
    "M",
    "distinct_edges",
    "empirical_eps",
    "cut_eps",
    "kkt_ratio",
    "mass",
    "objective",
    "converged",
    "t_gen",
    "t_balance",
    "t_plan",
    "t_draw",
    "t_verify",
    "status",
]


@dataclass(frozen=True)
class BenchConfig:
    """Sweep definition: one cell per (n, m, max_card, epsilon) combination."""

    ns: tuple[int, ...]
    ms: tuple[int, ...]
    max_cards: tuple[int, ...]
    epsilons: tuple[float, ...]
    trials: int = 3
    constant: float = DEFAULT_SAMPLE_CONSTANT
    tol: float = DEFAULT_TOL
    support_eps: float = DEFAULT_SUPPORT_EPS
    max_iters: int = DEFAULT_MAX_ITERS
    weight_range: tuple[float, float] = (0.5, 2.0)
    num_random: int = 1000
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        for name in ("ns", "ms", "max_cards", "epsilons"):
            if not getattr(self, name):
                raise ValueError(f"config list '{name}' must be nonempty")
        if self.trials < 1:
            raise ValueError("need at least one trial per cell")

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in doc.items() if k in known}
        for name in ("ns", "ms", "max_cards", "epsilons", "weight_range"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)

    def cells(self) -> list[tuple[int, int, int, float]]:
        return list(itertools.product(self.ns, self.ms, self.max_cards, self.epsilons))


@dataclass(frozen=True)
class RunRecord:
    """One pipeline run: instance parameters, outputs, and phase timings."""

    n: int
    m: int
    max_card: int
    epsilon: float
    trial: int
    seed: int
    M: int = 0
    distinct_edges: int = 0
    empirical_eps: float = math.nan
    cut_eps: float | None = None
    kkt_ratio: float = math.nan
    mass: float = math.nan
    objective: float = math.nan
    converged: bool = False
    t_gen: float = 0.0
    t_balance: float = 0.0
    t_plan: float = 0.0
    t_draw: float = 0.0
    t_verify: float = 0.0
    status: str = "ok"

    def csv_row(self) -> list:
        return [
            self.n,
            self.m,
            self.max_card,
            repr(self.epsilon),
            self.trial,
            self.seed,
            self.M,
            self.distinct_edges,
            repr(self.empirical_eps),
            "" if self.cut_eps is None else repr(self.cut_eps),
            repr(self.kkt_ratio),
            repr(self.mass),
            repr(self.objective),
            int(self.converged),
            f"{self.t_gen:.4f}",
            f"{self.t_balance:.4f}",
            f"{self.t_plan:.4f}",
            f"{self.t_draw:.4f}",
            f"{self.t_verify:.4f}",
            self.status,
        ]


def _phase_seeds(master: int, cell_idx: int, trial: int) -> tuple[int, int, int]:
    ss = np.random.SeedSequence(master, spawn_key=(cell_idx, trial))
    gen_s, draw_s, verify_s = (int(s) for s in ss.generate_state(3, dtype=np.uint64))
    return gen_s, draw_s, verify_s


def run_cell_trial(config: BenchConfig, cell_idx: int, trial: int) -> RunRecord:
    """Execute one (cell, trial) pipeline run; failures become marked rows."""
    n, m, max_card, epsilon = config.cells()[cell_idx]
    gen_seed, draw_seed, verify_seed = _phase_seeds(config.seed, cell_idx, trial)
    record = RunRecord(n=n, m=m, max_card=max_card, epsilon=epsilon, trial=trial, seed=gen_seed)
    try:
        t0 = time.perf_counter()
        hg = random_hypergraph(n, m, max_card, config.weight_range, seed=gen_seed)
        t1 = time.perf_counter()
        split, report = balance(
            hg, tol=config.tol, max_iters=config.max_iters, support_eps=config.support_eps
        )
        t2 = time.perf_counter()
        plan = build_plan(hg, split)
        num = sample_count(hg.n, hg.rank, plan.mass, epsilon, config.constant)
        t3 = time.perf_counter()
        sp = draw(hg, plan, num, draw_seed)
        sparsified = sp.as_hypergraph()
        t4 = time.perf_counter()
        err = empirical_epsilon(hg, sparsified, config.num_random, verify_seed)
        cut_eps = (
            cut_error_exhaustive(hg, sparsified)
            if hg.n <= MAX_EXHAUSTIVE_CUT_VERTICES
            else None
        )
        t5 = time.perf_counter()
        return RunRecord(
            n=n,
            m=m,
            max_card=max_card,
            epsilon=epsilon,
            trial=trial,
            seed=gen_seed,
            M=num,
            distinct_edges=sp.num_distinct,
            empirical_eps=err.max_relative_error,
            cut_eps=cut_eps,
            kkt_ratio=report.kkt_ratio,
            mass=report.resistance_mass,
            objective=report.objective_trace[-1],
            converged=report.converged,
            t_gen=t1 - t0,
            t_balance=t2 - t1,
            t_plan=t3 - t2,
            t_draw=t4 - t3,
            t_verify=t5 - t4,
            status="ok",
        )
    except Exception as exc:  # noqa: BLE001 - failed rows are data, not crashes
        return RunRecord(
            n=n,
            m=m,
            max_card=max_card,
            epsilon=epsilon,
            trial=trial,
            seed=gen_seed,
            status=f"error:{type(exc).__name__}",
        )


def _completed_keys(path: Path) -> set[tuple]:
    done: set[tuple] = set()
    if not path.exists():
        return done
    with path.open() as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header is None:
            return done
        for row in reader:
            if len(row) >= 5:
                done.add((int(row[0]), int(row[1]), int(row[2]), float(row[3]), int(row[4])))
    return done


def worker_count() -> int:
    """Worker pool size, capped by the HSPARSE_THREADS environment variable."""
    default = min(os.cpu_count() or 1, 8)
    raw = os.environ.get("HSPARSE_THREADS")
    if raw:
        try:
            return max(1, min(default, int(raw))) if int(raw) > 0 else default
        except ValueError:
            return default
    return default


def run_bench(config: BenchConfig) -> list[RunRecord]:
    """Run the sweep, appending one CSV row per newly completed (cell, trial).

    Rows already present in the output file are skipped, so an interrupted
    run resumes where it stopped.  Returns the records computed by this call.
    """
    jobs = [
        (cell_idx, trial)
        for cell_idx in range(len(config.cells()))
        for trial in range(config.trials)
    ]
    out_path = Path(config.out) if config.out else None
    done: set[tuple] = _completed_keys(out_path) if out_path else set()

    def key_of(cell_idx: int, trial: int) -> tuple:
        n, m, max_card, epsilon = config.cells()[cell_idx]
        return (n, m, max_card, epsilon, trial)

    pending = [(c, t) for c, t in jobs if key_of(c, t) not in done]
    records: list[RunRecord] = []

    fh = None
    writer = None
    if out_path is not None:
        fresh = not out_path.exists() or out_path.stat().st_size == 0
        fh = out_path.open("a", newline="")
        writer = csv.writer(fh)
        if fresh:
            fh.write(SCHEMA_COMMENT + "\n")
            writer.writerow(CSV_COLUMNS)
            fh.flush()
    try:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            futures = [pool.submit(run_cell_trial, config, c, t) for c, t in pending]
            for fut in futures:
                record = fut.result()
                records.append(record)
                if writer is not None:
                    writer.writerow(record.csv_row())
                    fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


def min_passing_samples(
    hg: Hypergraph,
    plan: SamplingPlan,
    target_eps: float,
    trials: int = 3,
    seed: int = 0,
    num_random: int = 1000,
    sample_cap: int = 2**22,
) -> int:
    """Smallest sample count whose sparsifiers meet the target error.

    A sample count passes when at least half of ``trials`` seeded draws give
    an empirical error (over a fixed battery of random directions) at most
    ``target_eps``.  Doubles from 16 until a passing count is bracketed, then
    bisects to the boundary.  Deterministic for fixed seed.
    """
    X = random_directions(hg.n, num_random, seed)
    per_edge = edge_energy_matrix(hg, X)
    q_ref = per_edge @ hg.weights
    mask = q_ref > 0
    trial_seeds = [
        int(s)
        for s in np.random.SeedSequence(seed, spawn_key=(1,)).generate_state(
            trials, dtype=np.uint64
        )
    ]
    need = math.ceil(trials / 2)

    def passes(num: int) -> bool:
        good = 0
        for ts in trial_seeds:
            sp = draw(hg, plan, num, ts)
            q_sp = per_edge @ sp.weight_vector()
            err = float(np.max(np.abs(q_ref[mask] - q_sp[mask]) / q_ref[mask]))
            good += err <= target_eps
        return good >= need

    num = 16
    while not passes(num):
        num *= 2
        if num > sample_cap:
            raise RuntimeError(f"no passing sample count up to {sample_cap}")
    lo, hi = num // 2, num
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_constant(
    cases: Sequence[tuple[Hypergraph, SamplingPlan]],
    epsilon: float,
    trials: int = 5,
    seed: int = 0,
    num_random: int = 2000,
    upper: float = DEFAULT_SAMPLE_CONSTANT,
    resolution: float = 1.25,
) -> float:
    """Bisect the smallest sample-size constant passing on a reference suite.

    A constant passes when, for every case, at least half the seeded trials
    reach empirical error at most ``epsilon`` with the sample count the
    constant implies.  The search doubles ``upper`` until it passes, then
    bisects geometrically down to the given resolution factor.
    """

    def passes(constant: float) -> bool:
        for case_idx, (hg, plan) in enumerate(cases):
            num = sample_count(hg.n, hg.rank, plan.mass, epsilon, constant)
            seeds = np.random.SeedSequence(seed, spawn_key=(case_idx,)).generate_state(
                trials, dtype=np.uint64
            )
            good = 0
            for ts in seeds:
                sp = draw(hg, plan, num, int(ts))
                err = empirical_epsilon(hg, sp.as_hypergraph(), num_random, int(ts) ^ 1)
                good += err.max_relative_error <= epsilon
            if good < math.ceil(trials / 2):
                return False
        return True

    hi = upper
    while not passes(hi):
        hi *= 2
        if hi > 4096:
            raise RuntimeError("calibration failed to find a passing constant")
    lo = 0.0
    while lo == 0.0 or hi / lo > resolution:
        mid = hi / 2 if lo == 0.0 else math.sqrt(lo * hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
        if hi < 1e-3:
            break
    return hi
