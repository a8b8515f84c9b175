"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and the scaling-trend table.  Every test is deterministic (fixed
seeds).  Criterion 10 currently fails; see the README section on the
scaling trend for the measured behavior and the analysis.
"""

import math
import time

import numpy as np
import pytest

from hsparse import (
    ConductanceSplit,
    balance,
    build_laplacian,
    build_plan,
    chaining_diagnostics,
    draw,
    edge_energy_matrix,
    energy_batch,
    foster_sum,
    gradient,
    initialize_split,
    min_passing_samples,
    norm_domination_check,
    objective,
    random_hypergraph,
    sample_count,
    unbiasedness_check,
)
from hsparse.sampler import DEFAULT_SAMPLE_CONSTANT
from hsparse.verifier import cut_directions, random_directions


def _report(num: int, description: str, ok: bool, detail: str = "") -> None:
    line = f"AC-{num:02d} {'PASS' if ok else 'FAIL'}: {description}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert ok, line


def _instance_pool(count, n_hi, m_hi, d_hi, seed0, n_lo=6):
    rng = np.random.default_rng(seed0)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        d = min(n, int(rng.integers(2, d_hi + 1)))
        m = int(rng.integers(max(3, n // 2), m_hi + 1))
        out.append(random_hypergraph(n, m, d, (0.5, 2.0), seed=int(rng.integers(2**32))))
    return out


def test_ac01_foster_identity():
    t0 = time.time()
    worst = 0.0
    for hg in _instance_pool(100, n_hi=40, m_hi=100, d_hi=8, seed0=101):
        op = build_laplacian(hg.n, initialize_split(hg).aggregate())
        worst = max(worst, abs(foster_sum(op) - (hg.n - 1)))
    elapsed = time.time() - t0
    _report(
        1,
        "Foster identity on 100 random connected instances",
        worst <= 1e-6 and elapsed < 30,
        f"worst dev {worst:.2e}, {elapsed:.1f}s",
    )


def test_ac02_gradient_matches_finite_differences():
    t0 = time.time()
    rng = np.random.default_rng(202)
    h = 1e-5
    checked = 0
    worst = 0.0
    for k in range(10):
        n = int(rng.integers(5, 13))
        hg = random_hypergraph(n, int(rng.integers(4, 18)), min(n, 6), (0.5, 2.0), seed=300 + k)
        exp = hg.expansion
        vals = initialize_split(hg).values.copy()
        jitter = rng.uniform(0.6, 1.4, size=vals.shape)
        vals *= jitter
        for t in range(hg.num_edges):
            lo, hi = exp.edge_starts[t], exp.edge_starts[t + 1]
            vals[lo:hi] *= hg.edges[t].weight / vals[lo:hi].sum()
        split = ConductanceSplit(hg, vals)
        g = gradient(hg, split)
        for s in rng.choice(vals.shape[0], size=min(6, vals.shape[0]), replace=False):
            if vals[s] <= 2 * h:
                continue
            plus, minus = vals.copy(), vals.copy()
            plus[s] += h
            minus[s] -= h
            fd = (
                objective(hg, ConductanceSplit(hg, plus))
                - objective(hg, ConductanceSplit(hg, minus))
            ) / (2 * h)
            worst = max(worst, abs(fd - g[s]) / abs(g[s]))
            checked += 1
    elapsed = time.time() - t0
    _report(
        2,
        f"central differences match the resistance gradient on {checked} coordinates",
        checked >= 50 and worst <= 1e-4 and elapsed < 30,
        f"worst rel dev {worst:.2e}, {elapsed:.1f}s",
    )


def test_ac03_balancing_certificate():
    t0 = time.time()
    rng = np.random.default_rng(303)
    converged = 0
    silent_failures = 0
    for k in range(50):
        n = int(rng.integers(8, 41))
        d = min(n, int(rng.integers(2, 9)))
        m = int(rng.integers(n // 2 + 2, 121))
        hg = random_hypergraph(n, m, d, (0.5, 2.0), seed=int(rng.integers(2**32)))
        _, report = balance(hg, tol=1e-2, max_iters=500)
        good = report.kkt_ratio <= 1.01 and report.resistance_mass <= 1.01 * (hg.n - 1) * (
            1 + 1e-9
        )
        if good and report.converged:
            converged += 1
        if (report.kkt_ratio <= 1.01) != report.converged:
            silent_failures += 1
    elapsed = time.time() - t0
    _report(
        3,
        "balancing reaches the certificate on >= 45/50 instances within 500 iterations",
        converged >= 45 and silent_failures == 0 and elapsed < 300,
        f"{converged}/50 converged, {elapsed:.1f}s",
    )


def test_ac04_norm_domination():
    t0 = time.time()
    rng = np.random.default_rng(404)
    worst = 0.0
    for k in range(20):
        n = int(rng.integers(8, 25))
        d = min(n, int(rng.integers(2, 7)))
        hg = random_hypergraph(n, int(rng.integers(n, 61)), d, (0.5, 2.0), seed=500 + k)
        split, _ = balance(hg)
        res = norm_domination_check(hg, split, 1000, seed=600 + k)
        worst = max(worst, res.worst_ratio)
    elapsed = time.time() - t0
    _report(
        4,
        "norm domination holds for 1000 directions on 20 balanced instances",
        worst <= 1.0 + 1e-8 and elapsed < 60,
        f"worst ratio {worst:.12f}, {elapsed:.1f}s",
    )


def test_ac05_sparsifier_quality_desk_scale():
    t0 = time.time()
    target = 0.5
    trials = 20
    ok = True
    details = []

    # random-direction leg at n=64
    for d in (2, 4, 16):
        hg = random_hypergraph(64, 2000, d, (0.5, 2.0), seed=700 + d)
        split, report = balance(hg, tol=1e-2, max_iters=500)
        plan = build_plan(hg, split)
        M = sample_count(hg.n, hg.rank, plan.mass, target, DEFAULT_SAMPLE_CONSTANT)
        X = random_directions(64, 20_000, seed=710 + d)
        W = np.column_stack(
            [hg.weights]
            + [draw(hg, plan, M, 720 + 31 * d + s).weight_vector() for s in range(trials)]
        )
        Q = energy_batch(hg, X, weights=W)
        rel = (np.abs(Q[:, 1:] - Q[:, [0]]) / Q[:, [0]]).max(axis=0)
        passes = int(np.sum(rel <= target))
        ok &= passes >= trials // 2
        details.append(f"n=64 D={d}: {passes}/{trials} (median eps {np.median(rel):.3f}, M={M})")

    # exhaustive-cut leg at n=12 (max cardinality capped by the vertex count)
    for d in (2, 4, 12):
        hg = random_hypergraph(12, 2000, d, (0.5, 2.0), seed=800 + d)
        split, report = balance(hg, tol=1e-2, max_iters=500)
        plan = build_plan(hg, split)
        M = sample_count(hg.n, hg.rank, plan.mass, target, DEFAULT_SAMPLE_CONSTANT)
        X = cut_directions(12)
        W = np.column_stack(
            [hg.weights]
            + [draw(hg, plan, M, 820 + 31 * d + s).weight_vector() for s in range(trials)]
        )
        Q = energy_batch(hg, X, weights=W)
        rel = (np.abs(Q[:, 1:] - Q[:, [0]]) / Q[:, [0]]).max(axis=0)
        passes = int(np.sum(rel <= target))
        ok &= passes >= trials // 2
        details.append(f"n=12 D={d}: cuts {passes}/{trials} (median eps {np.median(rel):.3f})")

    elapsed = time.time() - t0
    _report(
        5,
        f"sampled sparsifiers meet eps=0.5 with constant C={DEFAULT_SAMPLE_CONSTANT}",
        ok and elapsed < 600,
        "; ".join(details) + f", {elapsed:.1f}s",
    )


def test_ac06_single_hyperedge_exactness():
    from hsparse import Hyperedge, Hypergraph, empirical_epsilon

    hg = Hypergraph(4, (Hyperedge((0, 1, 2, 3), 2.25),))
    split, _ = balance(hg)
    plan = build_plan(hg, split)
    sp = draw(hg, plan, 37, seed=42)
    ht = sp.as_hypergraph()
    exact_weight = ht.edges[0].weight == 2.25
    report = empirical_epsilon(hg, ht, 200, seed=7)
    _report(
        6,
        "single-hyperedge sparsifier is exact",
        exact_weight and report.max_relative_error == 0.0,
        f"weight {ht.edges[0].weight}, eps {report.max_relative_error}",
    )


def test_ac07_graph_case_leverage_scores():
    worst = 0.0
    for k in range(20):
        hg = random_hypergraph(int(6 + k % 10), 30 + k, 2, (0.5, 2.0), seed=900 + k)
        split, _ = balance(hg)
        plan = build_plan(hg, split)
        # independent oracle: diagonal of the weighted projection matrix
        m, n = hg.num_edges, hg.n
        B = np.zeros((m, n))
        for t, e in enumerate(hg.edges):
            i, j = e.vertices
            B[t, i], B[t, j] = 1.0, -1.0
        W = np.diag([e.weight for e in hg.edges])
        P = np.sqrt(W) @ B @ np.linalg.pinv(B.T @ W @ B) @ B.T @ np.sqrt(W)
        lev = np.diag(P) / (n - 1)
        worst = max(worst, float(np.max(np.abs(plan.probabilities - lev) / lev)))
    _report(
        7,
        "rank-2 sampling probabilities equal leverage scores on 20 graphs",
        worst <= 1e-6,
        f"worst rel dev {worst:.2e}",
    )


def test_ac08_unbiasedness():
    t0 = time.time()
    rng = np.random.default_rng(808)
    passes = 0
    for k in range(100):
        inst = k // 10
        n = int(6 + inst)
        hg = random_hypergraph(n, 12 + 2 * inst, min(n, 4), (0.5, 2.0), seed=1000 + inst)
        split, _ = balance(hg)
        plan = build_plan(hg, split)
        x = random_directions(n, 1, 1100 + k)[0]
        res = unbiasedness_check(hg, plan, 64, 200, x, seed=1200 + k)
        passes += res.ok
    elapsed = time.time() - t0
    _report(
        8,
        "sampled energy unbiased (|z| <= 3) on >= 95/100 combinations",
        passes >= 95,
        f"{passes}/100, {elapsed:.1f}s",
    )


def test_ac09_row_norm_bound():
    worst = 0.0
    for k, hg in enumerate(_instance_pool(25, n_hi=24, m_hi=60, d_hi=8, seed0=909)):
        split, _ = balance(hg)
        plan = build_plan(hg, split)
        sp = draw(hg, plan, 32, seed=k)
        diag = chaining_diagnostics(hg, split, plan, sp.edge_indices, 8, seed=k)
        worst = max(worst, diag.max_row_norm**2 / diag.mass)
    _report(
        9,
        "squared two-to-infinity norm bounded by the resistance mass on every instance",
        worst <= 1.0 + 1e-9,
        f"worst ratio {worst:.12f}",
    )


def test_ac10_scaling_trend():
    t0 = time.time()
    target = 0.5
    cards = (2, 4, 8, 16, 32)
    minimal = []
    for d in cards:
        hg = random_hypergraph(40, 400, d, (0.5, 2.0), seed=1300 + d)
        split, report = balance(hg, tol=1e-2, max_iters=500)
        plan = build_plan(hg, split)
        minimal.append(
            min_passing_samples(hg, plan, target, trials=5, seed=1400, num_random=1500)
        )
    ln_d = np.log(cards)
    A = np.vstack([np.ones_like(ln_d), ln_d]).T
    coef, *_ = np.linalg.lstsq(A, np.asarray(minimal, float), rcond=None)
    fit = A @ coef
    print("AC-10 table: minimal passing sample count by max cardinality")
    print(f"  {'max_card':>8} {'M*':>8} {'affine fit in ln(max_card)':>28} {'ratio':>8}")
    for d, m_star, f in zip(cards, minimal, fit):
        ratio = m_star / f if f > 0 else math.inf
        print(f"  {d:>8} {m_star:>8} {f:>28.1f} {ratio:>8.2f}")
    monotone = all(b >= a for a, b in zip(minimal, minimal[1:]))
    elapsed = time.time() - t0
    _report(
        10,
        "minimal passing sample count nondecreasing in max cardinality",
        monotone and elapsed < 1800,
        f"M*={minimal}, {elapsed:.1f}s",
    )
