"""Empirical certification of sparsifier quality, plus measurable diagnostics.

Certification is one-sided by construction: the reported error is a max over
sampled directions (Gaussians orthogonal to the constant vector, plus every
cut direction when the vertex count allows exhaustive enumeration), so it
lower-bounds the true worst-case relative error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .balancer import ConductanceSplit
from .errors import HsparseError, TooLargeError, ZeroEnergyDirectionError
from .hypergraph import Hypergraph, energy_batch, total_energy
from .laplacian import build_laplacian
from .sampler import SamplingPlan, Sparsifier

MAX_EXHAUSTIVE_CUT_VERTICES = 16


@dataclass(frozen=True)
class ErrorReport:
    """Worst observed relative energy error over a battery of directions."""

    max_relative_error: float
    argmax_kind: str
    num_directions: int
    exhaustive_cuts: bool


@dataclass(frozen=True)
class NormDominationResult:
    """Outcome of the norm-domination spot check."""

    ok: bool
    worst_ratio: float
    trials: int


@dataclass(frozen=True)
class UnbiasednessResult:
    """Z-test of the sampled energy's mean against the exact energy."""

    ok: bool
    z_score: float
    sample_mean: float
    expected: float
    trials: int


@dataclass(frozen=True)
class ChainingDiagnostics:
    """Monte-Carlo estimates of the Gaussian norm statistics of the sample.

    ``max_gauss_norm`` estimates the expected maximum, over sampled edges, of
    the edge's scaled resistance norm of a standard Gaussian;
    ``peak_rms_gauss_norm`` is the largest per-edge root mean square of the
    same norm.  ``max_row_norm`` is the exact two-to-infinity norm of the
    direction matrix, which never exceeds the square root of ``mass``.
    """

    max_gauss_norm: float
    max_gauss_norm_se: float
    peak_rms_gauss_norm: float
    peak_rms_gauss_norm_se: float
    max_row_norm: float
    mass: float
    num_gaussians: int


def random_directions(n: int, count: int, seed: int) -> np.ndarray:
    """Standard Gaussian directions projected orthogonal to the all-ones vector.

    Deterministic per seed, and prefix-stable: the first rows for a smaller
    ``count`` coincide with those for a larger one.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    X = rng.standard_normal((count, n))
    X -= X.mean(axis=1, keepdims=True)
    return X


def cut_directions(n: int) -> np.ndarray:
    """All nonconstant two-sided splits of ``[0, n)``, one per complement pair.

    Vertex ``n - 1`` is pinned to the minus side, giving ``2**(n-1) - 1``
    directions.
    """
    if n > MAX_EXHAUSTIVE_CUT_VERTICES:
        raise TooLargeError(
            f"exhaustive cuts supported up to n={MAX_EXHAUSTIVE_CUT_VERTICES}, got n={n}"
        )
    masks = np.arange(1, 2 ** (n - 1), dtype=np.uint32)
    bits = (masks[:, None] >> np.arange(n - 1, dtype=np.uint32)) & 1
    X = np.empty((masks.shape[0], n), dtype=float)
    X[:, : n - 1] = 2.0 * bits - 1.0
    X[:, n - 1] = -1.0
    return X


def relative_error(hg: Hypergraph, other: Hypergraph, x: np.ndarray) -> float:
    """Relative energy deviation of ``other`` from ``hg`` in direction ``x``."""
    reference = total_energy(hg, x)
    if reference == 0.0:
        raise ZeroEnergyDirectionError("reference energy is zero in this direction")
    return abs(reference - total_energy(other, x)) / reference


def _max_error_over(
    hg: Hypergraph, other: Hypergraph, directions: np.ndarray
) -> tuple[float, int]:
    """Worst relative error over the rows of ``directions`` with positive
    reference energy; returns (error, number of admissible directions)."""
    q_ref = energy_batch(hg, directions)
    q_other = energy_batch(other, directions)
    mask = q_ref > 0
    if not mask.any():
        return 0.0, 0
    err = np.abs(q_ref[mask] - q_other[mask]) / q_ref[mask]
    return float(err.max()), int(mask.sum())


def empirical_epsilon(
    hg: Hypergraph, other: Hypergraph, num_random: int, seed: int
) -> ErrorReport:
    """Max relative error over random directions, plus all cuts when feasible."""
    if num_random < 1:
        raise ValueError(f"need at least one random direction, got {num_random}")
    if hg.n != other.n:
        raise ValueError(f"vertex counts differ: {hg.n} vs {other.n}")
    err_rand, used = _max_error_over(hg, other, random_directions(hg.n, num_random, seed))
    best, kind, total = err_rand, "random", used
    exhaustive = hg.n <= MAX_EXHAUSTIVE_CUT_VERTICES
    if exhaustive:
        err_cut, used_cut = _max_error_over(hg, other, cut_directions(hg.n))
        total += used_cut
        if err_cut > best:
            best, kind = err_cut, "cut"
    return ErrorReport(
        max_relative_error=best,
        argmax_kind=kind,
        num_directions=total,
        exhaustive_cuts=exhaustive,
    )


def cut_error_exhaustive(hg: Hypergraph, other: Hypergraph) -> float:
    """Worst relative error over every nonconstant cut direction."""
    if hg.n != other.n:
        raise ValueError(f"vertex counts differ: {hg.n} vs {other.n}")
    err, _ = _max_error_over(hg, other, cut_directions(hg.n))
    return err


def norm_domination_check(
    hg: Hypergraph, split: ConductanceSplit, trials: int, seed: int
) -> NormDominationResult:
    """Spot-check that the split's energy dominates the Euclidean norm.

    For random ``x`` orthogonal to the constants, the energy of the
    pseudoinverse-square-root image of ``x`` must be at least ``|x|^2``
    whenever the split is feasible; the worst observed ratio is returned.
    """
    op = build_laplacian(hg.n, split.aggregate())
    X = random_directions(hg.n, trials, seed)
    V = op.pinv_sqrt_apply(X.T).T
    q = energy_batch(hg, V)
    norms = np.einsum("ij,ij->i", X, X)
    mask = q > 0
    ratios = norms[mask] / q[mask]
    worst = float(ratios.max()) if mask.any() else 0.0
    return NormDominationResult(ok=worst <= 1.0 + 1e-8, worst_ratio=worst, trials=trials)


def _edge_spreads(hg: Hypergraph, Z: np.ndarray) -> np.ndarray:
    """Per-edge potential spreads for each row of ``Z``; shape (B, num_edges)."""
    starts, flat = hg._vertex_layout
    vals = Z[:, flat]
    return np.maximum.reduceat(vals, starts[:-1], axis=1) - np.minimum.reduceat(
        vals, starts[:-1], axis=1
    )


def chaining_diagnostics(
    hg: Hypergraph,
    split: ConductanceSplit,
    plan: SamplingPlan,
    sampled_edges: Sequence[int],
    num_gaussians: int,
    seed: int,
) -> ChainingDiagnostics:
    """Gaussian statistics of the sampled edges' scaled resistance norms.

    The norm attached to a sampled edge maps ``g`` to the largest inner
    product, over the edge's pairs, with the pair's pseudoinverse-square-root
    difference vector, scaled by ``sqrt(mass / edge_resistance)``.  The exact
    two-to-infinity norm of the stacked direction matrix is computed from the
    resistances and checked against ``sqrt(mass)``.
    """
    if num_gaussians < 2:
        raise ValueError(f"need at least two Gaussian samples, got {num_gaussians}")
    distinct = np.unique(np.asarray(sampled_edges, dtype=np.int64))
    if distinct.size == 0:
        raise ValueError("need at least one sampled edge")
    op = build_laplacian(hg.n, split.aggregate())
    exp = hg.expansion
    mass = plan.mass

    # Exact two-to-infinity norm: per pair, the largest scaled row norm over
    # the hyperedges containing it.
    res = plan.pair_resistances
    inv_edge_res = 1.0 / plan.edge_resistance
    row_norm_sq = np.array(
        [
            mass * res[p] * inv_edge_res[exp.edges_of_pair[p]].max()
            for p in range(len(exp))
        ]
    )
    max_row_norm_sq = float(row_norm_sq.max())
    if max_row_norm_sq > mass * (1.0 + 1e-9):
        raise HsparseError(
            f"two-to-infinity norm bound violated: {max_row_norm_sq} > {mass}"
        )

    scale = np.sqrt(mass * inv_edge_res[distinct])
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    G = rng.standard_normal((num_gaussians, hg.n))
    # Inner products with the pair difference vectors reduce to coordinate
    # gaps of the pseudoinverse-square-root image, so the per-edge norm is a
    # scaled spread.
    imgs = op.pinv_sqrt_apply(G.T).T
    norms = _edge_spreads(hg, imgs)[:, distinct] * scale

    max_per_gaussian = norms.max(axis=1)
    kappa = float(max_per_gaussian.mean())
    kappa_se = float(max_per_gaussian.std(ddof=1) / math.sqrt(num_gaussians))

    second = norms**2
    second_mean = second.mean(axis=0)
    peak = int(np.argmax(second_mean))
    lam = float(math.sqrt(second_mean[peak]))
    lam_sq_se = float(second[:, peak].std(ddof=1) / math.sqrt(num_gaussians))
    lam_se = lam_sq_se / (2.0 * lam) if lam > 0 else 0.0

    return ChainingDiagnostics(
        max_gauss_norm=kappa,
        max_gauss_norm_se=kappa_se,
        peak_rms_gauss_norm=lam,
        peak_rms_gauss_norm_se=lam_se,
        max_row_norm=float(math.sqrt(max_row_norm_sq)),
        mass=mass,
        num_gaussians=num_gaussians,
    )


def unbiasedness_check(
    hg: Hypergraph,
    plan: SamplingPlan,
    num_samples: int,
    trials: int,
    x: np.ndarray,
    seed: int,
) -> UnbiasednessResult:
    """Test that sampled energies average to the exact energy in direction ``x``.

    Draws ``trials`` independent sparsifiers and z-tests the sample mean; the
    check passes when the score lies within three standard errors.
    """
    from .sampler import draw

    if trials < 30:
        raise ValueError(f"need at least 30 trials for the z-test, got {trials}")
    expected = total_energy(hg, x)
    if expected == 0.0:
        raise ZeroEnergyDirectionError("direction has zero energy; nothing to test")
    per_edge = _edge_spreads(hg, np.asarray(x, dtype=float)[None, :])[0] ** 2
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    trial_seeds = rng.integers(0, 2**63, size=trials)
    samples = np.empty(trials)
    for t in range(trials):
        sp = draw(hg, plan, num_samples, int(trial_seeds[t]))
        samples[t] = sp.weight_vector() @ per_edge
    mean = float(samples.mean())
    std = float(samples.std(ddof=1))
    if std == 0.0:
        z = 0.0 if mean == expected else math.inf
    else:
        z = (mean - expected) / (std / math.sqrt(trials))
    return UnbiasednessResult(
        ok=abs(z) <= 3.0, z_score=float(z), sample_mean=mean, expected=expected, trials=trials
    )


def symmetrized_fluctuation(
    hg: Hypergraph,
    plan: SamplingPlan,
    sparsifier: Sparsifier,
    x: np.ndarray,
    num_sign_draws: int = 200,
    seed: int = 0,
) -> tuple[float, float]:
    """Optional diagnostic: mean absolute random-sign sum of the fixed sample.

    For the sparsifier's edge multiset and a fixed direction, measures the
    average magnitude of the sign-symmetrized normalized energy sum.  No
    pass/fail threshold is attached; returns (mean, standard error).
    """
    per_edge = _edge_spreads(hg, np.asarray(x, dtype=float)[None, :])[0] ** 2
    idx = sparsifier.edge_indices
    terms = (hg.weights[idx] / plan.probabilities[idx]) * per_edge[idx] / sparsifier.num_samples
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    # Sum of count_e independent signs, drawn per edge as a shifted binomial.
    heads = rng.binomial(sparsifier.counts, 0.5, size=(num_sign_draws, idx.shape[0]))
    sign_sums = 2.0 * heads - sparsifier.counts
    totals = np.abs(sign_sums @ terms)
    return float(totals.mean()), float(totals.std(ddof=1) / math.sqrt(num_sign_draws))
