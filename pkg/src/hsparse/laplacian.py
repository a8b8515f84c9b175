"""Weighted clique-expansion Laplacians and effective resistances.

The operator is realized by a dense spectral decomposition, which amortizes
the many resistance queries the conductance balancer issues per iteration and
gives the pseudoinverse square root for free.  Intended for desk scale
(n up to a few thousand).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DisconnectedPairError
from .hypergraph import PairSet, component_labels


@dataclass(frozen=True)
class Conductances:
    """Nonnegative conductance per pair of a `PairSet`."""

    pair_set: PairSet
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if vals.shape != (len(self.pair_set),):
            raise ValueError(
                f"conductance vector has shape {vals.shape}, expected ({len(self.pair_set)},)"
            )
        if vals.size and vals.min() < 0:
            raise ValueError("conductances must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def laplacian_matrix(n: int, cond: Conductances) -> np.ndarray:
    """Dense weighted Laplacian sum of c_ij (chi_i - chi_j)(chi_i - chi_j)^T."""
    L = np.zeros((n, n), dtype=float)
    i = cond.pair_set.pairs[:, 0]
    j = cond.pair_set.pairs[:, 1]
    c = cond.values
    np.subtract.at(L, (i, j), c)
    np.subtract.at(L, (j, i), c)
    np.add.at(L, (i, i), c)
    np.add.at(L, (j, j), c)
    return L


@dataclass(frozen=True)
class LaplacianOperator:
    """Spectral decomposition of a clique-expansion Laplacian.

    Exposes application of L, its pseudoinverse, and the symmetric PSD square
    root of the pseudoinverse.  Eigenvalues at or below the cutoff
    ``tau = n * machine_eps * lambda_max`` are treated as kernel.  Disconnected
    support is allowed at build time; only resistance queries across
    components fail.
    """

    n: int
    matrix: np.ndarray
    conductances: Conductances
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    tau: float
    rank: int
    connected: bool
    components: np.ndarray = field(repr=False)

    @cached_property
    def _pos(self) -> np.ndarray:
        return self.eigenvalues > self.tau

    @cached_property
    def green_matrix(self) -> np.ndarray:
        """Dense pseudoinverse of the Laplacian."""
        V = self.eigenvectors[:, self._pos]
        lam = self.eigenvalues[self._pos]
        G = (V / lam) @ V.T
        G.setflags(write=False)
        return G

    def apply(self, b: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(b, dtype=float)

    def pinv_apply(self, b: np.ndarray) -> np.ndarray:
        """Apply the Moore-Penrose pseudoinverse of the Laplacian."""
        b = np.asarray(b, dtype=float)
        V = self.eigenvectors[:, self._pos]
        return V @ ((V.T @ b) / self.eigenvalues[self._pos])

    def pinv_sqrt_apply(self, b: np.ndarray) -> np.ndarray:
        """Apply the symmetric PSD square root of the pseudoinverse.

        Applying twice agrees with `pinv_apply`.  Accepts a vector or a
        matrix whose columns are vectors.
        """
        b = np.asarray(b, dtype=float)
        V = self.eigenvectors[:, self._pos]
        return V @ ((V.T @ b).T / np.sqrt(self.eigenvalues[self._pos])).T

    def effective_resistance(self, i: int, j: int) -> float:
        """Resistance between two vertices of the support graph."""
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"need two distinct vertices in [0, {self.n}), got {i}, {j}")
        if self.components[i] != self.components[j]:
            raise DisconnectedPairError(
                f"vertices {i} and {j} lie in different components; resistance is infinite"
            )
        G = self.green_matrix
        return float(G[i, i] + G[j, j] - 2.0 * G[i, j])

    def pair_resistances(self, pairs: np.ndarray) -> np.ndarray:
        """Effective resistances for an array of pairs, shape (k, 2)."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        i, j = pairs[:, 0], pairs[:, 1]
        if np.any(self.components[i] != self.components[j]):
            raise DisconnectedPairError("some pairs span different components")
        G = self.green_matrix
        d = G[i, i] + G[j, j] - 2.0 * G[i, j]
        return np.maximum(d, 0.0)


def build_laplacian(n: int, cond: Conductances) -> LaplacianOperator:
    """Assemble and eigendecompose the weighted clique-expansion Laplacian."""
    L = laplacian_matrix(n, cond)
    lam, V = np.linalg.eigh(L)
    lam = np.maximum(lam, 0.0)
    lam_max = float(lam[-1]) if n else 0.0
    tau = n * np.finfo(float).eps * lam_max
    rank = int(np.count_nonzero(lam > tau))
    support = cond.pair_set.pairs[cond.values > 0]
    components = component_labels(n, support)
    L.setflags(write=False)
    lam.setflags(write=False)
    V.setflags(write=False)
    components.setflags(write=False)
    return LaplacianOperator(
        n=n,
        matrix=L,
        conductances=cond,
        eigenvalues=lam,
        eigenvectors=V,
        tau=tau,
        rank=rank,
        connected=rank == n - 1,
        components=components,
    )


def foster_sum(op: LaplacianOperator, cond: Conductances | None = None) -> float:
    """Sum of conductance times resistance over supported pairs.

    Equals the trace of ``L L^+``, i.e. the rank of the Laplacian: at most
    ``n - 1``, with equality exactly when the support graph is connected.
    """
    cond = cond if cond is not None else op.conductances
    mask = cond.values > 0
    if not mask.any():
        return 0.0
    # Supported pairs always join vertices of one component, so every
    # resistance in the sum is finite.
    res = op.pair_resistances(cond.pair_set.pairs[mask])
    return float(cond.values[mask] @ res)
