"""Synthetic friendship graphs with controllable group homophily.

Stub matching in the configuration-model style: every agent contributes
degree-many stubs; each stub is matched to a same-group stub with
probability h and to a uniformly random stub otherwise, so h = 0 is exactly
the random-tie null model whose neighborhood composition equals the global
group fractions. Self-loops and multi-edges are rejected and rematched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GROUP_LABELS, OpinionSnapshot, SocialGraph, group_of

# Global group fractions of the empirical null model (SL, L, M, C, SC).
NULL_MODEL_FRACTIONS = (0.08, 0.19, 0.53, 0.16, 0.04)

GROUP_INTERVALS = ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0))

_REMATCH_CAP = 100


class DegreeSequenceError(ValueError):
    """Raised when stub matching cannot realize the drawn degree sequence."""


@dataclass(frozen=True)
class PopulationSpec:
    """Agent count, group mix, and (optionally group-specific) mean degree."""

    n: int
    group_fractions: tuple = NULL_MODEL_FRACTIONS
    mean_degrees: tuple | float = 16.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two agents")
        f = np.asarray(self.group_fractions, dtype=np.float64)
        if f.shape != (5,) or np.any(f < 0):
            raise ValueError("group_fractions must be 5 non-negative reals")
        if abs(f.sum() - 1.0) > 1e-9:
            raise ValueError("group_fractions must sum to 1")
        md = self.mean_degrees
        md = (float(md),) * 5 if np.isscalar(md) else tuple(float(v) for v in md)
        if len(md) != 5 or min(md) < 1.0:
            raise ValueError("mean degree must be >= 1 for every group")
        object.__setattr__(self, "group_fractions", tuple(float(v) for v in f))
        object.__setattr__(self, "mean_degrees", md)


@dataclass(frozen=True)
class HomophilySpec:
    """Probability mass h moved from random matching to same-group matching."""

    h: float = 0.0
    target_assortativity: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.h < 1.0:
            raise ValueError("h must lie in [0, 1)")


class _StubPool:
    """Multiset of stubs with O(1) uniform draw-and-remove (swap with last)."""

    def __init__(self, owners):
        self.owners = list(owners)

    def __len__(self):
        return len(self.owners)

    def draw(self, rng) -> int:
        k = int(rng.integers(len(self.owners)))
        owner = self.owners[k]
        self.owners[k] = self.owners[-1]
        self.owners.pop()
        return owner

    def put_back(self, owner) -> None:
        self.owners.append(owner)


def _sample_population(pop: PopulationSpec, rng):
    groups = rng.choice(5, size=pop.n, p=pop.group_fractions)
    lo = np.array([GROUP_INTERVALS[g][0] for g in range(5)])[groups]
    opinions = lo + 0.2 * rng.random(pop.n)
    means = np.asarray(pop.mean_degrees)[groups]
    degrees = np.maximum(rng.poisson(means), 1)
    if degrees.sum() % 2 == 1:
        degrees[int(rng.integers(pop.n))] += 1
    return groups, opinions, degrees


def _match_uniform(owners: np.ndarray, rng) -> list:
    """h = 0 fast path: pair shuffled stubs directly; collisions are dropped
    (negligible at graph scale) and the degree floor fixes any losses."""
    rng.shuffle(owners)
    half = len(owners) // 2
    a, b = owners[:half], owners[half:2 * half]
    keep = a != b
    lo = np.minimum(a[keep], b[keep])
    hi = np.maximum(a[keep], b[keep])
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    return [tuple(e) for e in pairs]


def generate(pop: PopulationSpec, hom: HomophilySpec, seed: int):
    """Draw (SocialGraph, OpinionSnapshot) with group-homophilic ties.

    Opinions are uniform within each agent's group interval; every agent
    ends with degree >= 1 (failed stubs are re-wired at the end).
    """
    rng = np.random.default_rng(seed)
    groups, opinions, degrees = _sample_population(pop, rng)
    n = pop.n

    if hom.h == 0.0:
        edges = _match_uniform(np.repeat(np.arange(n), degrees), rng)
        edge_set = set(edges)
        got = np.zeros(n, dtype=np.int64)
        arr = np.asarray(edges, dtype=np.int64)
        np.add.at(got, arr[:, 0], 1)
        np.add.at(got, arr[:, 1], 1)
        for i in np.flatnonzero(got == 0):
            for _ in range(_REMATCH_CAP):
                j = int(rng.integers(n))
                if j != i and (min(i, j), max(i, j)) not in edge_set:
                    edge_set.add((min(i, j), max(i, j)))
                    edges.append((i, j))
                    break
            else:
                raise DegreeSequenceError(f"could not wire agent {i}")
        graph = SocialGraph.from_edges(n, edges)
        return graph, OpinionSnapshot(time_index=1, opinions=opinions)

    owners = np.repeat(np.arange(n), degrees)
    rng.shuffle(owners)
    global_pool = _StubPool(owners.tolist())
    group_pools = [_StubPool(owners[groups[owners] == g].tolist())
                   for g in range(5)]
    # group pools are views for biased draws; the global pool is the source
    # of truth, so group draws must be re-checked against a liveness count
    remaining = degrees.astype(np.int64).copy()

    edges = []
    edge_set = set()

    def try_match(u: int, pool: _StubPool) -> bool:
        for _ in range(_REMATCH_CAP):
            if len(pool) == 0:
                return False
            v = pool.draw(rng)
            if remaining[v] <= 0:  # stale entry from the other pool family
                continue
            if v == u or (min(u, v), max(u, v)) in edge_set:
                pool.put_back(v)
                continue
            remaining[v] -= 1
            edge_set.add((min(u, v), max(u, v)))
            edges.append((u, v))
            return True
        return False

    while len(global_pool) > 0:
        u = global_pool.draw(rng)
        if remaining[u] <= 0:
            continue
        remaining[u] -= 1
        matched = False
        if hom.h > 0.0 and rng.random() < hom.h:
            matched = try_match(u, group_pools[groups[u]])
        if not matched:
            matched = try_match(u, global_pool)
        if not matched:
            remaining[u] += 1  # stub dropped; degree floor fixed below

    # degree floor: agents that lost every stub get one uniform tie
    got = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        got[u] += 1
        got[v] += 1
    for i in np.flatnonzero(got == 0):
        for attempt in range(_REMATCH_CAP):
            j = int(rng.integers(n))
            if j != i and (min(i, j), max(i, j)) not in edge_set:
                edge_set.add((min(i, j), max(i, j)))
                edges.append((i, j))
                got[i] += 1
                got[j] += 1
                break
        else:
            raise DegreeSequenceError(f"could not wire agent {i} into the graph")

    graph = SocialGraph.from_edges(n, edges)
    return graph, OpinionSnapshot(time_index=1, opinions=opinions)


def assortativity(graph: SocialGraph, snapshot: OpinionSnapshot) -> float:
    """Newman's discrete assortativity over the five group labels."""
    if graph.edge_count == 0:
        raise ValueError("graph has no edges")
    groups = group_of(snapshot.opinions)
    src = np.repeat(np.arange(graph.n), graph.degrees)
    mix = np.zeros((5, 5))
    np.add.at(mix, (groups[src], groups[graph.indices]), 1.0)
    mix /= mix.sum()
    a = mix.sum(axis=1)
    b = mix.sum(axis=0)
    ab = float(np.dot(a, b))
    if abs(1.0 - ab) < 1e-12:
        raise ValueError("all agents share one group: assortativity undefined")
    return float((np.trace(mix) - ab) / (1.0 - ab))


@dataclass(frozen=True)
class CalibrationResult:
    h: float
    achieved: float
    target: float
    iterations: int


def calibrate_homophily(pop: PopulationSpec, target: float = 0.14,
                        tol: float = 0.01, seed: int = 0,
                        max_iter: int = 20) -> CalibrationResult:
    """Bisection on h against measured assortativity (monotone in h)."""
    lo, hi = 0.0, 0.95

    def measure(h: float, k: int) -> float:
        g, s = generate(pop, HomophilySpec(h=h), seed=seed + 1000 * k)
        return assortativity(g, s)

    r_lo = measure(lo, 0)
    r_hi = measure(hi, 1)
    if not r_lo <= target <= r_hi:
        raise ValueError(f"target {target} outside reachable range "
                         f"[{r_lo:.3f}, {r_hi:.3f}]")
    h, r = lo, r_lo
    for k in range(max_iter):
        h = 0.5 * (lo + hi)
        r = measure(h, 2 + k)
        if abs(r - target) <= tol:
            return CalibrationResult(h=h, achieved=r, target=target,
                                     iterations=k + 1)
        if r < target:
            lo = h
        else:
            hi = h
    return CalibrationResult(h=h, achieved=r, target=target,
                             iterations=max_iter)


def group_populations(snapshot: OpinionSnapshot) -> dict:
    """Agent count per ideological group label."""
    counts = np.bincount(group_of(snapshot.opinions), minlength=5)
    return {GROUP_LABELS[g]: int(counts[g]) for g in range(5)}
