"""Weighted hypergraphs, their energy form, and the clique expansion.

A hypergraph lives on dense vertex ids ``0..n-1``.  The energy of a potential
vector ``x`` is ``sum_e w_e * (max gap inside e)**2``, where the max gap of a
hyperedge is the largest difference ``x_i - x_j`` over its vertices.  All
types here are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateVertexError,
    InvalidHypergraphError,
    NonpositiveWeightError,
    SingletonEdgeError,
    VertexOutOfRangeError,
)


@dataclass(frozen=True)
class Hyperedge:
    """A set of at least two distinct vertices with a positive weight.

    Vertices are stored as a sorted tuple so that equality and the internal
    pair order are canonical.
    """

    vertices: tuple[int, ...]
    weight: float

    @property
    def cardinality(self) -> int:
        return len(self.vertices)

    def pairs(self) -> Iterable[tuple[int, int]]:
        """Unordered vertex pairs inside the edge, lexicographically ordered."""
        return itertools.combinations(self.vertices, 2)


@dataclass(frozen=True)
class PairSet:
    """Deduplicated vertex pairs of a clique expansion, with edge back-links.

    ``pairs`` holds each unordered pair once as a row ``(i, j)`` with
    ``i < j``, sorted lexicographically.  When built from a hypergraph, the
    flat per-edge layout is populated: edge ``t`` owns the slice
    ``flat_pairs[edge_starts[t]:edge_starts[t+1]]`` whose entries are row
    indices into ``pairs``, ordered like ``Hyperedge.pairs()``.
    """

    pairs: np.ndarray
    index: Mapping[tuple[int, int], int]
    edge_starts: np.ndarray | None = None
    flat_pairs: np.ndarray | None = None
    edges_of_pair: tuple[np.ndarray, ...] | None = None

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def position(self, i: int, j: int) -> int:
        """Row index of the unordered pair ``{i, j}``."""
        return self.index[(i, j) if i < j else (j, i)]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "PairSet":
        """Build a standalone pair set (no edge back-links) from pair tuples."""
        canon = sorted({(min(i, j), max(i, j)) for i, j in pairs})
        arr = np.asarray(canon, dtype=np.int64).reshape(len(canon), 2)
        arr.setflags(write=False)
        return cls(pairs=arr, index={p: t for t, p in enumerate(canon)})


@dataclass(frozen=True)
class Hypergraph:
    """Immutable weighted hypergraph on vertex ids ``[0, n)``.

    ``meta`` carries optional provenance (generator or sampler bookkeeping)
    and never participates in equality.
    """

    n: int
    edges: tuple[Hyperedge, ...]
    meta: Mapping | None = field(default=None, compare=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def rank(self) -> int:
        """Largest hyperedge cardinality."""
        return max(e.cardinality for e in self.edges)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.array([e.weight for e in self.edges], dtype=float)
        w.setflags(write=False)
        return w

    @cached_property
    def expansion(self) -> PairSet:
        return clique_expansion(self)

    @cached_property
    def _vertex_layout(self) -> tuple[np.ndarray, np.ndarray]:
        # Flattened vertex lists of all edges; one reduceat segment per edge.
        starts = np.zeros(self.num_edges + 1, dtype=np.int64)
        flat = []
        for t, e in enumerate(self.edges):
            flat.extend(e.vertices)
            starts[t + 1] = len(flat)
        flat_arr = np.asarray(flat, dtype=np.int64)
        starts.setflags(write=False)
        flat_arr.setflags(write=False)
        return starts, flat_arr


def validate(raw: Mapping | object) -> Hypergraph:
    """Check an untrusted hypergraph description and build a `Hypergraph`.

    Accepts a mapping ``{"n": int, "edges": [{"v": [...], "w": float}, ...]}``
    (the on-disk JSON shape) or edge entries given as ``(vertices, weight)``
    pairs.  Duplicate hyperedges are permitted and kept distinct.

    Raises
    ------
    SingletonEdgeError
        if a hyperedge has fewer than two vertices.
    NonpositiveWeightError
        if a weight is not a finite positive number.
    VertexOutOfRangeError
        if a vertex id is not an integer in ``[0, n)``.
    DuplicateVertexError
        if a vertex id repeats inside one hyperedge.
    """
    if not isinstance(raw, Mapping):
        raise InvalidHypergraphError("hypergraph description must be a mapping")
    try:
        n = int(raw["n"])
    except (KeyError, TypeError, ValueError):
        raise InvalidHypergraphError("missing or non-integer vertex count 'n'")
    if n < 1:
        raise InvalidHypergraphError(f"vertex count must be >= 1, got {n}")
    raw_edges = raw.get("edges")
    if not raw_edges:
        raise InvalidHypergraphError("missing or empty 'edges' list")

    edges = []
    for pos, entry in enumerate(raw_edges):
        if isinstance(entry, Mapping):
            verts, weight = entry.get("v"), entry.get("w")
        else:
            verts, weight = entry
        verts = list(verts)
        if len(verts) < 2:
            raise SingletonEdgeError(
                f"edge {pos}: cardinality {len(verts)} < 2"
            )
        ids = []
        for v in verts:
            iv = int(v)
            if iv != v or not (0 <= iv < n):
                raise VertexOutOfRangeError(f"edge {pos}: vertex {v!r} not in [0, {n})")
            ids.append(iv)
        if len(set(ids)) != len(ids):
            raise DuplicateVertexError(f"edge {pos}: repeated vertex id")
        w = float(weight)
        if not (math.isfinite(w) and w > 0):
            raise NonpositiveWeightError(f"edge {pos}: weight {weight!r} is not positive")
        edges.append(Hyperedge(vertices=tuple(sorted(ids)), weight=w))

    meta = raw.get("meta") if isinstance(raw, Mapping) else None
    return Hypergraph(n=n, edges=tuple(edges), meta=meta)


def clique_expansion(hg: Hypergraph) -> PairSet:
    """Union of all vertex pairs inside hyperedges, with per-pair edge lists."""
    index: dict[tuple[int, int], int] = {}
    containing: list[list[int]] = []
    starts = np.zeros(hg.num_edges + 1, dtype=np.int64)
    flat: list[int] = []
    for t, e in enumerate(hg.edges):
        for p in e.pairs():
            pos = index.get(p)
            if pos is None:
                pos = len(index)
                index[p] = pos
                containing.append([])
            containing[pos].append(t)
            flat.append(pos)
        starts[t + 1] = len(flat)

    # Re-sort pairs lexicographically and remap all references.
    keys = list(index.keys())
    perm = sorted(range(len(keys)), key=lambda t: keys[t])
    new_pos = np.empty(len(keys), dtype=np.int64)
    for rank, old in enumerate(perm):
        new_pos[old] = rank
    pairs = np.asarray([keys[old] for old in perm], dtype=np.int64).reshape(len(keys), 2)
    flat_arr = new_pos[np.asarray(flat, dtype=np.int64)]
    edges_of_pair = tuple(
        np.asarray(sorted(containing[old]), dtype=np.int64) for old in perm
    )
    sorted_index = {tuple(p): t for t, p in enumerate(pairs.tolist())}

    pairs.setflags(write=False)
    starts.setflags(write=False)
    flat_arr.setflags(write=False)
    return PairSet(
        pairs=pairs,
        index=sorted_index,
        edge_starts=starts,
        flat_pairs=flat_arr,
        edges_of_pair=edges_of_pair,
    )


def edge_energy(edge: Hyperedge | Iterable[int], x: Sequence[float]) -> float:
    """Largest squared potential gap inside one hyperedge (weight not applied).

    Equals the max of ``(x_i - x_j)**2`` over vertex pairs of the edge, which
    is the squared spread ``(max - min)**2`` of the potentials.
    """
    verts = edge.vertices if isinstance(edge, Hyperedge) else tuple(edge)
    vals = np.asarray(x, dtype=float)[list(verts)]
    spread = float(vals.max() - vals.min())
    return spread * spread


def total_energy(hg: Hypergraph, x: Sequence[float]) -> float:
    """Energy of a potential vector: weighted sum of per-edge squared spreads."""
    x = np.asarray(x, dtype=float)
    if x.shape != (hg.n,):
        raise ValueError(f"potential vector has shape {x.shape}, expected ({hg.n},)")
    starts, flat = hg._vertex_layout
    vals = x[flat]
    spread = np.maximum.reduceat(vals, starts[:-1]) - np.minimum.reduceat(vals, starts[:-1])
    return float(hg.weights @ (spread * spread))


def energy_batch(
    hg: Hypergraph,
    directions: np.ndarray,
    weights: np.ndarray | None = None,
    chunk_size: int = 256,
) -> np.ndarray:
    """Energies of many potential vectors, optionally under several weightings.

    ``directions`` has shape ``(B, n)``.  With ``weights=None`` the
    hypergraph's own edge weights apply and the result has shape ``(B,)``.
    Passing a ``(num_edges,)`` vector or ``(num_edges, T)`` matrix evaluates
    the same per-edge energies under those weightings instead (shape ``(B,)``
    or ``(B, T)``), which lets callers score many reweighted sub-hypergraphs
    against one direction battery in a single pass.
    """
    directions = np.asarray(directions, dtype=float)
    if directions.ndim != 2 or directions.shape[1] != hg.n:
        raise ValueError(f"directions must have shape (B, {hg.n})")
    squeeze = False
    if weights is None:
        w = np.asarray(hg.weights, dtype=float).reshape(hg.num_edges, 1)
        squeeze = True
    else:
        w = np.asarray(weights, dtype=float)
        if w.ndim == 1:
            w = w.reshape(-1, 1)
            squeeze = True
        if w.shape[0] != hg.num_edges:
            raise ValueError("weights must have one row per hyperedge")

    starts, flat = hg._vertex_layout
    out = np.empty((directions.shape[0], w.shape[1]), dtype=float)
    for lo in range(0, directions.shape[0], chunk_size):
        block = directions[lo : lo + chunk_size]
        vals = block[:, flat]
        spread = np.maximum.reduceat(vals, starts[:-1], axis=1)
        spread -= np.minimum.reduceat(vals, starts[:-1], axis=1)
        np.square(spread, out=spread)
        out[lo : lo + block.shape[0]] = spread @ w
    return out[:, 0] if squeeze else out


def edge_energy_matrix(
    hg: Hypergraph, directions: np.ndarray, chunk_size: int = 256
) -> np.ndarray:
    """Per-edge squared spreads for many directions; shape (B, num_edges).

    Row ``b`` dotted with a weight vector gives the energy of direction ``b``
    under that weighting; materialize this only when the same directions are
    scored against many weightings.
    """
    directions = np.asarray(directions, dtype=float)
    if directions.ndim != 2 or directions.shape[1] != hg.n:
        raise ValueError(f"directions must have shape (B, {hg.n})")
    starts, flat = hg._vertex_layout
    out = np.empty((directions.shape[0], hg.num_edges), dtype=float)
    for lo in range(0, directions.shape[0], chunk_size):
        vals = directions[lo : lo + chunk_size][:, flat]
        spread = np.maximum.reduceat(vals, starts[:-1], axis=1)
        spread -= np.minimum.reduceat(vals, starts[:-1], axis=1)
        np.square(spread, out=spread)
        out[lo : lo + spread.shape[0]] = spread
    return out


def component_labels(n: int, pairs: np.ndarray) -> np.ndarray:
    """Connected-component label per vertex for the graph given by ``pairs``."""
    parent = np.arange(n, dtype=np.int64)

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for i, j in np.asarray(pairs, dtype=np.int64).reshape(-1, 2):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[rj] = ri
    labels = np.fromiter((find(v) for v in range(n)), dtype=np.int64, count=n)
    # Relabel as 0..k-1 in order of first appearance.
    _, compact = np.unique(labels, return_inverse=True)
    return compact


def random_hypergraph(
    n: int,
    m: int,
    max_card: int,
    weight_range: tuple[float, float] = (1.0, 1.0),
    seed: int = 0,
) -> Hypergraph:
    """Random hypergraph with a connected clique expansion.

    Each of the ``m`` hyperedges has cardinality uniform in ``[2, max_card]``,
    vertices sampled without replacement, and weight uniform in
    ``weight_range``.  Deterministic for a fixed seed.  If the clique
    expansion of a draw is disconnected the whole edge set is re-drawn a few
    times; as a last resort, two-vertex connector edges joining the remaining
    components are appended, with the event recorded in ``meta``.
    """
    if not (2 <= max_card <= n):
        raise ValueError(f"need 2 <= max_card <= n, got max_card={max_card}, n={n}")
    if m < 1:
        raise ValueError(f"need at least one edge, got m={m}")
    lo, hi = float(weight_range[0]), float(weight_range[1])
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise ValueError(f"weight range must be a positive interval, got {weight_range}")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    redraws = 0
    for _ in range(20):
        cards = rng.integers(2, max_card + 1, size=m)
        edges = tuple(
            Hyperedge(
                vertices=tuple(sorted(int(v) for v in rng.choice(n, size=int(k), replace=False))),
                weight=float(w),
            )
            for k, w in zip(cards, rng.uniform(lo, hi, size=m))
        )
        hg = Hypergraph(n=n, edges=edges)
        labels = component_labels(n, hg.expansion.pairs)
        if labels.max() == 0:
            meta = {"seed": seed, "redraws": redraws} if redraws else {"seed": seed}
            return Hypergraph(n=n, edges=edges, meta=meta)
        redraws += 1

    # Join leftover components with a path of 2-vertex edges at the low weight.
    reps = [int(np.argmax(labels == c)) for c in range(int(labels.max()) + 1)]
    connectors = tuple(
        Hyperedge(vertices=(min(a, b), max(a, b)), weight=lo)
        for a, b in zip(reps, reps[1:])
    )
    return Hypergraph(
        n=n,
        edges=edges + connectors,
        meta={"seed": seed, "redraws": redraws, "connector_edges": len(connectors)},
    )
