"""Resistance-weighted importance sampling of hyperedges.

A sampling plan scores each hyperedge by its weight times the largest
effective resistance among its internal pairs (in the clique-expansion graph
of the balanced conductances).  Hyperedges are then drawn with replacement
proportionally to that score, and each distinct sampled edge is reweighted by
its sample frequency over its probability, which makes the sampled energy an
unbiased estimator of the original energy in every direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balancer import ConductanceSplit
from .errors import DisconnectedError
from .hypergraph import Hyperedge, Hypergraph
from .laplacian import build_laplacian

DEFAULT_SAMPLE_CONSTANT = 8.0
"""Leading constant of the sample-size rule.

Calibrated empirically on the reference acceptance suite (random instances
with n=64, m=2000, max cardinality up to 16 at target error 0.5); see
`hsparse.bench.calibrate_constant` for the bisection procedure.
"""


@dataclass(frozen=True)
class SamplingPlan:
    """Importance distribution over the hyperedges of one hypergraph.

    ``pair_resistances`` is indexed like the clique expansion's pair list,
    ``edge_resistance`` holds the per-hyperedge max pair resistance, ``mass``
    their weighted sum (the normalizer), and ``probabilities`` the resulting
    distribution, strictly positive and summing to one.
    """

    hypergraph: Hypergraph
    pair_resistances: np.ndarray = field(repr=False)
    edge_resistance: np.ndarray = field(repr=False)
    mass: float
    probabilities: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Sparsifier:
    """A multiset of sampled hyperedges with reweighted edge weights.

    ``edge_indices`` lists the distinct sampled edges (indices into the
    source hypergraph's edge tuple) and ``counts`` their multiplicities,
    summing to ``num_samples``.  The output weight of a sampled edge is
    ``(count / num_samples) * (weight / probability)``.
    """

    source: Hypergraph
    edge_indices: np.ndarray
    counts: np.ndarray
    weights: np.ndarray
    num_samples: int
    seed: int

    @property
    def num_distinct(self) -> int:
        return int(self.edge_indices.shape[0])

    def weight_vector(self) -> np.ndarray:
        """Output weights embedded over the source edge list (zeros elsewhere)."""
        full = np.zeros(self.source.num_edges, dtype=float)
        full[self.edge_indices] = self.weights
        return full

    def as_hypergraph(self) -> Hypergraph:
        """Materialize the sparsifier as a hypergraph over the same vertices."""
        edges = tuple(
            Hyperedge(vertices=self.source.edges[t].vertices, weight=float(w))
            for t, w in zip(self.edge_indices.tolist(), self.weights.tolist())
        )
        meta = {"num_samples": self.num_samples, "seed": self.seed}
        return Hypergraph(n=self.source.n, edges=edges, meta=meta)


def build_plan(hg: Hypergraph, split: ConductanceSplit) -> SamplingPlan:
    """Compute the importance distribution induced by a conductance split.

    Raises `DisconnectedError` when the split's aggregate support does not
    connect the vertices, since resistances are then undefined.
    """
    if split.hypergraph is not hg and split.hypergraph != hg:
        raise ValueError("split was computed for a different hypergraph")
    op = build_laplacian(hg.n, split.aggregate())
    if not op.connected:
        raise DisconnectedError("sampling plan needs a connected aggregate support")
    exp = hg.expansion
    res = op.pair_resistances(exp.pairs)
    res_flat = res[exp.flat_pairs]
    edge_res = np.maximum.reduceat(res_flat, exp.edge_starts[:-1])
    scores = hg.weights * edge_res
    mass = float(scores.sum())
    if not (mass > 0 and np.all(scores > 0)):
        raise DisconnectedError("every hyperedge must carry positive resistance mass")
    probs = scores / mass
    res.setflags(write=False)
    edge_res.setflags(write=False)
    probs.setflags(write=False)
    return SamplingPlan(
        hypergraph=hg,
        pair_resistances=res,
        edge_resistance=edge_res,
        mass=mass,
        probabilities=probs,
    )


def sample_count(n: int, rank: int, mass: float, epsilon: float, constant: float = DEFAULT_SAMPLE_CONSTANT) -> int:
    """Number of independent draws for a target relative error.

    ``ceil(constant * epsilon**-2 * ln(2 * rank) * mass * ln(max(n, 3)))``;
    monotone in every argument.  ``ln(2 * rank)`` keeps the rank-2 (graph)
    case nondegenerate.
    """
    if not (0 < epsilon < 1):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 2 or rank < 2:
        raise ValueError(f"need n >= 2 and rank >= 2, got n={n}, rank={rank}")
    if not (mass > 0):
        raise ValueError(f"resistance mass must be positive, got {mass}")
    if not (constant > 0):
        raise ValueError(f"constant must be positive, got {constant}")
    return int(math.ceil(constant * epsilon**-2 * math.log(2 * rank) * mass * math.log(max(n, 3))))


def draw(hg: Hypergraph, plan: SamplingPlan, num_samples: int, seed: int) -> Sparsifier:
    """Sample ``num_samples`` hyperedges i.i.d. from the plan and reweight.

    Deterministic for a fixed seed.  The plan's probabilities are used
    verbatim in the reweighting, so the sampled energy is unbiased exactly
    when they form the true sampling distribution.
    """
    if num_samples < 1:
        raise ValueError(f"need at least one sample, got {num_samples}")
    probs = np.asarray(plan.probabilities, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    # The multinomial needs an exactly normalized vector; the reweighting
    # below intentionally keeps the plan's raw probabilities.
    counts = rng.multinomial(num_samples, probs / probs.sum())
    idx = np.flatnonzero(counts)
    counts_nz = counts[idx]
    weights = (counts_nz / num_samples) * (hg.weights[idx] / probs[idx])
    idx.setflags(write=False)
    counts_nz.setflags(write=False)
    weights.setflags(write=False)
    return Sparsifier(
        source=hg,
        edge_indices=idx,
        counts=counts_nz,
        weights=weights,
        num_samples=num_samples,
        seed=seed,
    )
