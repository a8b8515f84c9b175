"""Conductance balancing by log-determinant descent.

Each hyperedge's weight is split across its internal vertex pairs; the split
is optimized so that, within every hyperedge, the effective resistances of
the pairs actually carrying conductance agree.  The objective is the convex
barrier ``-log det(L + J)`` (``J`` the all-ones matrix), whose partial
derivative in a pair coordinate is minus the pair's effective resistance, so
stationarity on each simplex forces the balanced-resistance certificate.

The optimizer is a block multiplicative scheme on the product of simplices:
each coordinate is scaled by ``(R_ij / R_max(e)) ** t`` and the block is
renormalized, a mirror-descent step with entropy mirror map whose gradient
exponents are rescaled per hyperedge.  Step exponent ``t = 1`` never
increases the objective (the update is then gradient-proportional in the
sense of Baum-Eagon, and ``det(L + J)`` is a polynomial with nonnegative
coefficients in the conductances), and a backtracking line search on the
objective keeps the trace nonincreasing for the over-relaxed exponents tried
after successful steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DisconnectedError, SingularMatrixError
from .hypergraph import Hypergraph, component_labels
from .laplacian import Conductances, LaplacianOperator, build_laplacian, laplacian_matrix

DEFAULT_TOL = 1e-2
DEFAULT_MAX_ITERS = 500
DEFAULT_SUPPORT_EPS = 1e-6

# Multiplicative floor keeping every coordinate strictly positive so the
# entropy mirror map stays defined; far below the support threshold.
_COORDINATE_FLOOR = 1e-12
_STEP_MAX = 8.0
_STEP_GROW = 1.5
_MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class ConductanceSplit:
    """Per-(hyperedge, pair) conductances, flat over the clique expansion.

    Coordinate ``s`` of ``values`` belongs to hyperedge
    ``t = searchsorted(edge_starts, s)`` and to the pair
    ``expansion.pairs[expansion.flat_pairs[s]]``; within one hyperedge the
    coordinates follow ``Hyperedge.pairs()`` order.  Feasible splits have
    nonnegative coordinates summing to the edge weight within each hyperedge.
    """

    hypergraph: Hypergraph
    values: np.ndarray

    def __post_init__(self):
        exp = self.hypergraph.expansion
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if vals.shape != exp.flat_pairs.shape:
            raise ValueError(
                f"split has {vals.shape[0] if vals.ndim == 1 else vals.shape} coordinates, "
                f"expected {exp.flat_pairs.shape[0]}"
            )
        if vals.size and vals.min() < 0:
            raise ValueError("split coordinates must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def edge_values(self, t: int) -> np.ndarray:
        starts = self.hypergraph.expansion.edge_starts
        return self.values[starts[t] : starts[t + 1]]

    def coordinate_pairs(self) -> np.ndarray:
        """The (i, j) pair behind each flat coordinate, shape (S, 2)."""
        exp = self.hypergraph.expansion
        return exp.pairs[exp.flat_pairs]

    def per_edge_sums(self) -> np.ndarray:
        exp = self.hypergraph.expansion
        return np.add.reduceat(self.values, exp.edge_starts[:-1])

    def feasibility_error(self) -> float:
        """Worst relative deviation of a per-hyperedge sum from its weight."""
        w = self.hypergraph.weights
        return float(np.max(np.abs(self.per_edge_sums() - w) / w))

    def aggregate(self) -> Conductances:
        """Pair conductances summed over the hyperedges sharing each pair."""
        exp = self.hypergraph.expansion
        agg = np.bincount(exp.flat_pairs, weights=self.values, minlength=len(exp))
        return Conductances(pair_set=exp, values=agg)

    def with_values(self, values: np.ndarray) -> "ConductanceSplit":
        return replace(self, values=values)


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of a balancing run.

    ``objective_trace`` holds the objective at the initial split and after
    every accepted step, and is nonincreasing.  ``edge_resistance_levels``
    is the per-hyperedge max pair resistance at the final split, the level
    the supported pairs equalize to.  A run that exhausts its iteration
    budget reports ``converged=False`` but still returns its best iterate.
    """

    iterations: int
    objective_trace: tuple[float, ...]
    kkt_ratio: float
    resistance_mass: float
    edge_resistance_levels: np.ndarray = field(repr=False)
    support_eps: float
    converged: bool


def initialize_split(hg: Hypergraph) -> ConductanceSplit:
    """Uniform split: each hyperedge spreads its weight evenly over its pairs."""
    exp = hg.expansion
    counts = np.diff(exp.edge_starts)
    vals = np.repeat(hg.weights / counts, counts)
    return ConductanceSplit(hypergraph=hg, values=vals)


def _objective_of_values(hg: Hypergraph, flat_values: np.ndarray) -> float:
    exp = hg.expansion
    agg = np.bincount(exp.flat_pairs, weights=flat_values, minlength=len(exp))
    A = laplacian_matrix(hg.n, Conductances(exp, agg))
    A += 1.0
    sign, logdet = np.linalg.slogdet(A)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularMatrixError(
            "log det(L + J) undefined: aggregate support is disconnected"
        )
    return -float(logdet)


def objective(hg: Hypergraph, split: ConductanceSplit) -> float:
    """Barrier value ``-log det(L + J)`` at the split's aggregate conductances."""
    return _objective_of_values(hg, split.values)


def gradient(hg: Hypergraph, split: ConductanceSplit) -> np.ndarray:
    """Partial derivatives of the objective: minus the pair resistances.

    Coordinates of hyperedges sharing a pair receive identical entries.
    """
    op = build_laplacian(hg.n, split.aggregate())
    if not op.connected:
        raise SingularMatrixError("gradient undefined: aggregate support is disconnected")
    exp = hg.expansion
    res = op.pair_resistances(exp.pairs)
    return -res[exp.flat_pairs]


def _kkt_from_arrays(
    values: np.ndarray,
    res_flat: np.ndarray,
    res_max_flat: np.ndarray,
    support_floor: np.ndarray,
) -> float:
    mask = values > support_floor
    return float(np.max(res_max_flat[mask] / res_flat[mask]))


def kkt_residual(
    hg: Hypergraph,
    split: ConductanceSplit,
    support_eps: float = DEFAULT_SUPPORT_EPS,
) -> float:
    """Worst ratio of max pair resistance to realized pair resistance.

    The max runs over each hyperedge's pairs carrying more than
    ``support_eps`` times the edge weight; the returned value is always at
    least 1, and 1 exactly certifies balanced resistances on the support.
    """
    op = build_laplacian(hg.n, split.aggregate())
    if not op.connected:
        raise DisconnectedError("balanced-resistance ratio needs connected support")
    exp = hg.expansion
    counts = np.diff(exp.edge_starts)
    res_flat = op.pair_resistances(exp.pairs)[exp.flat_pairs]
    res_max = np.maximum.reduceat(res_flat, exp.edge_starts[:-1])
    floor = support_eps * np.repeat(hg.weights, counts)
    return _kkt_from_arrays(split.values, res_flat, np.repeat(res_max, counts), floor)


def balance(
    hg: Hypergraph,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    support_eps: float = DEFAULT_SUPPORT_EPS,
) -> tuple[ConductanceSplit, BalanceReport]:
    """Optimize the conductance split until resistances balance within ``tol``.

    Returns the split together with a report; convergence means the
    balanced-resistance ratio dropped to ``1 + tol`` on the supported
    coordinates.  Exhausting ``max_iters`` is not an error: the best iterate
    is returned with ``converged=False``.

    Raises
    ------
    DisconnectedError
        if the clique expansion of ``hg`` is not connected, in which case no
        finite objective exists.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    exp = hg.expansion
    if component_labels(hg.n, exp.pairs).max() != 0:
        raise DisconnectedError("clique expansion is disconnected; cannot balance")

    counts = np.diff(exp.edge_starts)
    w = hg.weights
    w_flat = np.repeat(w, counts)
    floor_flat = _COORDINATE_FLOOR * w_flat
    support_floor = support_eps * w_flat
    starts = exp.edge_starts[:-1]

    vals = initialize_split(hg).values
    phi = _objective_of_values(hg, vals)
    trace = [phi]
    step = 1.0
    iterations = 0
    converged = False

    while True:
        op = build_laplacian(hg.n, Conductances(exp, np.bincount(exp.flat_pairs, weights=vals, minlength=len(exp))))
        res_flat = op.pair_resistances(exp.pairs)[exp.flat_pairs]
        res_max_edge = np.maximum.reduceat(res_flat, starts)
        res_max_flat = np.repeat(res_max_edge, counts)
        ratio = _kkt_from_arrays(vals, res_flat, res_max_flat, support_floor)
        if ratio <= 1.0 + tol:
            converged = True
            break
        if iterations >= max_iters:
            break

        shrink = res_flat / res_max_flat
        t = step
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            cand = vals * shrink**t
            sums = np.add.reduceat(cand, starts)
            cand *= np.repeat(w / sums, counts)
            cand = np.maximum(cand, floor_flat)
            sums = np.add.reduceat(cand, starts)
            cand *= np.repeat(w / sums, counts)
            phi_new = _objective_of_values(hg, cand)
            if phi_new <= phi:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # Objective at its numerical floor; keep the current iterate.
            break
        vals = cand
        phi = phi_new
        trace.append(phi)
        step = min(t * _STEP_GROW, _STEP_MAX)
        iterations += 1

    mass = float(w @ res_max_edge)
    report = BalanceReport(
        iterations=iterations,
        objective_trace=tuple(trace),
        kkt_ratio=ratio,
        resistance_mass=mass,
        edge_resistance_levels=res_max_edge,
        support_eps=support_eps,
        converged=converged,
    )
    return ConductanceSplit(hypergraph=hg, values=vals), report
