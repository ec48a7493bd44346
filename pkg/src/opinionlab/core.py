"""Shared domain types: opinions, snapshots, friendship graphs, ideological groups.

Opinions are scalars in [0, 1] (0 = strong opposition, 1 = strong support).
Graphs are undirected friendship networks stored in compressed neighbor-list
(CSR) form so that neighborhood reductions over millions of edges stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class IsolatedAgentError(ValueError):
    """Raised when an operation requires at least one neighbor."""


class OpinionRangeError(ValueError):
    """Raised when an opinion falls outside [0, 1]."""


class IdeologicalGroup(IntEnum):
    """Five ideological groups, totally ordered from left to right."""

    SL = 0
    L = 1
    M = 2
    C = 3
    SC = 4


GROUPS = tuple(IdeologicalGroup)
GROUP_LABELS = ("SL", "L", "M", "C", "SC")

# Left edges of the five group intervals; boundaries belong to the right-hand
# group, 1.0 belongs to SC.
GROUP_EDGES = np.array([0.0, 0.2, 0.4, 0.6, 0.8])


def assign_group(opinion: float) -> IdeologicalGroup:
    """Map an opinion to its ideological group.

    Intervals: SL [0,0.2), L [0.2,0.4), M [0.4,0.6), C [0.6,0.8), SC [0.8,1].
    Boundary comparisons are exact (no epsilon), so classification is
    deterministic.
    """
    if not 0.0 <= opinion <= 1.0:
        raise OpinionRangeError(f"opinion {opinion!r} outside [0, 1]")
    if opinion < 0.2:
        return IdeologicalGroup.SL
    if opinion < 0.4:
        return IdeologicalGroup.L
    if opinion < 0.6:
        return IdeologicalGroup.M
    if opinion < 0.8:
        return IdeologicalGroup.C
    return IdeologicalGroup.SC


def group_of(opinions: np.ndarray) -> np.ndarray:
    """Vectorized assign_group: int codes 0..4, one per opinion."""
    arr = np.asarray(opinions, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        bad = arr[(arr < 0.0) | (arr > 1.0)][0]
        raise OpinionRangeError(f"opinion {bad!r} outside [0, 1]")
    return np.digitize(arr, GROUP_EDGES[1:])


@dataclass(frozen=True)
class SocialGraph:
    """Undirected simple graph in CSR form.

    indptr has length n+1; indices[indptr[i]:indptr[i+1]] are agent i's
    neighbors, sorted and distinct. Symmetry (j in N(i) <=> i in N(j)),
    no self-loops and no duplicates are established at build time.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "SocialGraph":
        """Build from an iterable of (i, j) pairs; either orientation, dupes ok."""
        src = []
        dst = []
        for i, j in edges:
            if i == j:
                continue
            src.append(i)
            dst.append(j)
        if src:
            a = np.concatenate([np.asarray(src, dtype=np.int64),
                                np.asarray(dst, dtype=np.int64)])
            b = np.concatenate([np.asarray(dst, dtype=np.int64),
                                np.asarray(src, dtype=np.int64)])
            if a.min() < 0 or a.max() >= n:
                raise ValueError("edge endpoint outside agent range")
            order = np.lexsort((b, a))
            a, b = a[order], b[order]
            keep = np.ones(len(a), dtype=bool)
            keep[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
            a, b = a[keep], b[keep]
        else:
            a = np.empty(0, dtype=np.int64)
            b = np.empty(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, a + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n=n, indptr=indptr, indices=b)

    @property
    def degrees(self) -> np.ndarray:
        return self.indptr[1:] - self.indptr[:-1]

    @property
    def edge_count(self) -> int:
        return int(len(self.indices) // 2)

    def neighbors(self, agent: int) -> np.ndarray:
        return self.indices[self.indptr[agent]:self.indptr[agent + 1]]

    def edge_list(self) -> np.ndarray:
        """(m, 2) array, one row per undirected edge with src < dst."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def validate(self) -> None:
        """Check symmetry, sortedness, no self-loops, no duplicates."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        if np.any(src == self.indices):
            raise ValueError("self-loop present")
        for i in range(self.n):
            nb = self.neighbors(i)
            if len(nb) > 1 and np.any(nb[1:] <= nb[:-1]):
                raise ValueError(f"neighbor list of {i} not sorted/distinct")
        fwd = set(map(tuple, np.column_stack([src, self.indices])))
        if any((j, i) not in fwd for i, j in fwd):
            raise ValueError("adjacency not symmetric")

    def connected_components(self) -> np.ndarray:
        """Component label per agent (iterative BFS; safe for large graphs)."""
        labels = np.full(self.n, -1, dtype=np.int64)
        current = 0
        for start in range(self.n):
            if labels[start] != -1:
                continue
            labels[start] = current
            frontier = [start]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in self.neighbors(u):
                        if labels[v] == -1:
                            labels[v] = current
                            nxt.append(int(v))
                frontier = nxt
            current += 1
        return labels


@dataclass(frozen=True)
class OpinionSnapshot:
    """Per-agent opinions at one time index."""

    time_index: int
    opinions: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.opinions, dtype=np.float64)
        object.__setattr__(self, "opinions", arr)
        if arr.ndim != 1:
            raise ValueError("opinions must be a 1-d array")
        finite = arr[np.isfinite(arr)]  # NaN marks unobservable agents
        if finite.size and (finite.min() < 0.0 or finite.max() > 1.0):
            raise OpinionRangeError("snapshot contains opinions outside [0, 1]")

    @property
    def n(self) -> int:
        return len(self.opinions)


@dataclass(frozen=True)
class NeighborhoodStats:
    """Mean and population std of a neighborhood's opinions."""

    mean: float
    std: float
    degree: int


def segment_sums(per_edge_values: np.ndarray, graph: SocialGraph) -> np.ndarray:
    """Sum one value per CSR entry into a per-agent total (0 where degree 0).

    reduceat cannot take offsets at the end of the array and misreads empty
    segments, so degree-0 agents are patched explicitly.
    """
    if len(per_edge_values) == 0:
        return np.zeros(graph.n)
    pos = np.minimum(graph.indptr[:-1], len(per_edge_values) - 1)
    sums = np.add.reduceat(per_edge_values, pos)
    sums[graph.degrees == 0] = 0.0
    return sums


def _segment_extrema(per_edge_values: np.ndarray, graph: SocialGraph):
    if len(per_edge_values) == 0:
        z = np.zeros(graph.n)
        return z, z
    pos = np.minimum(graph.indptr[:-1], len(per_edge_values) - 1)
    return (np.minimum.reduceat(per_edge_values, pos),
            np.maximum.reduceat(per_edge_values, pos))


def neighbor_means(graph: SocialGraph, opinions: np.ndarray) -> np.ndarray:
    """Average neighbor opinion for every agent, NaN where degree is 0.

    Constant neighborhoods return the shared value exactly.
    """
    deg = graph.degrees
    per_edge = opinions[graph.indices]
    sums = segment_sums(per_edge, graph)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = sums / deg
    lo, hi = _segment_extrema(per_edge, graph)
    const = lo == hi
    out[const] = lo[const]
    out[deg == 0] = np.nan
    return out


def neighbor_stds(graph: SocialGraph, opinions: np.ndarray,
                  means: np.ndarray | None = None) -> np.ndarray:
    """Population std of neighbor opinions per agent (divisor = degree).

    Exactly 0 iff all neighbor opinions are equal.
    """
    if means is None:
        means = neighbor_means(graph, opinions)
    deg = graph.degrees
    per_edge = opinions[graph.indices]
    sq = segment_sums(per_edge ** 2, graph)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = sq / deg - means ** 2
    out = np.sqrt(np.maximum(var, 0.0))
    lo, hi = _segment_extrema(per_edge, graph)
    out[lo == hi] = 0.0
    out[deg == 0] = np.nan
    return out


def neighborhood_stats(graph: SocialGraph, snapshot: OpinionSnapshot,
                       agent: int) -> NeighborhoodStats:
    """Mean/std/degree of one agent's neighborhood, per the population formula."""
    nb = graph.neighbors(agent)
    if len(nb) == 0:
        raise IsolatedAgentError(f"agent {agent} has no neighbors")
    vals = snapshot.opinions[nb]
    if np.all(vals == vals[0]):
        return NeighborhoodStats(mean=float(vals[0]), std=0.0, degree=len(nb))
    mean = float(vals.mean())
    std = float(np.sqrt(((vals - mean) ** 2).mean()))
    return NeighborhoodStats(mean=mean, std=std, degree=len(nb))


def pearson_correlation(xs, ys) -> float:
    """Sample Pearson correlation coefficient.

    Raises ValueError on length mismatch, length < 2, or zero variance.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d arrays of equal length")
    if len(x) < 2:
        raise ValueError("need at least two points")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt((xd ** 2).sum())
    sy = np.sqrt((yd ** 2).sum())
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    return float((xd * yd).sum() / (sx * sy))


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshot sequence with run provenance."""

    snapshots: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        counts = {s.n for s in self.snapshots}
        if len(counts) > 1:
            raise ValueError("snapshots disagree on agent count")
        times = [s.time_index for s in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("time_index must be strictly increasing")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, k) -> OpinionSnapshot:
        return self.snapshots[k]
