"""Advance opinion snapshots over a friendship graph under a chosen kernel.

A synchronous step reads the whole pre-step snapshot and updates every agent
that passes its activation draw; an asynchronous step updates one uniformly
drawn agent per micro-step (Deffuant-style when paired with the
random-neighbor source). Observations are emitted every
``steps_per_observation`` micro-steps.

Determinism contract: the per-step RNG stream is seeded by (run seed, step
index) through numpy's SeedSequence, so a trajectory is bit-identical for a
given (graph, snapshot, kernel, schedule, seed) no matter how the work is
partitioned.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .core import OpinionSnapshot, SocialGraph, Trajectory, neighbor_means
from .kernels import ActivationModel, AlwaysActive, InfluenceKernel

SYNCHRONOUS = "synchronous"
ASYNCHRONOUS_UNIFORM = "asynchronous_uniform"
SOURCE_MEAN = "neighborhood_mean"
SOURCE_RANDOM_NEIGHBOR = "random_neighbor"


@dataclass(frozen=True)
class Schedule:
    """Update schedule and run plumbing (seed, observation spacing, clamping)."""

    kind: str = SYNCHRONOUS
    steps_per_observation: int = 1
    rng_seed: int = 0
    source: str = SOURCE_MEAN
    clamp: bool = True

    def __post_init__(self):
        if self.kind not in (SYNCHRONOUS, ASYNCHRONOUS_UNIFORM):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.source not in (SOURCE_MEAN, SOURCE_RANDOM_NEIGHBOR):
            raise ValueError(f"unknown influence source {self.source!r}")
        if self.steps_per_observation < 1:
            raise ValueError("steps_per_observation must be >= 1")


def graph_hash(graph: SocialGraph) -> str:
    h = hashlib.sha256()
    h.update(graph.indptr.tobytes())
    h.update(graph.indices.tobytes())
    return h.hexdigest()[:16]


def spread(snapshot) -> float:
    """Max minus min opinion; the consensus/polarization diagnostic."""
    x = snapshot.opinions if isinstance(snapshot, OpinionSnapshot) else np.asarray(snapshot)
    if len(x) == 0:
        raise ValueError("empty snapshot")
    return float(np.max(x) - np.min(x))


def _stubborn_mask(kernel: InfluenceKernel, n: int) -> np.ndarray | None:
    if not kernel.stubborn_set:
        return None
    mask = np.zeros(n, dtype=bool)
    mask[np.fromiter(kernel.stubborn_set, dtype=np.int64)] = True
    return mask


def _apply_prejudice(kernel: InfluenceKernel, moved: np.ndarray) -> np.ndarray:
    pj = kernel.prejudice
    if pj is None:
        return moved
    if len(pj.anchors) != len(moved):
        raise ValueError("prejudice arrays must cover every agent")
    return pj.susceptibility * moved + (1.0 - pj.susceptibility) * pj.anchors


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, stream key).

    SeedSequence spawn keys avoid the default_rng((seed, 0)) == default_rng(seed)
    collision, so a keyed stream never replays another component's draws.
    """
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _step_rng(seed: int, step_index: int) -> np.random.Generator:
    return stream_rng(seed, 0, step_index)


def _random_neighbor_sources(graph: SocialGraph, x: np.ndarray,
                             rng: np.random.Generator) -> np.ndarray:
    deg = graph.degrees
    if len(graph.indices) == 0:
        return x.copy()
    offsets = np.floor(rng.random(graph.n) * np.maximum(deg, 1)).astype(np.int64)
    # degree-0 agents get a dummy in-range position; the caller masks them out
    pos = np.minimum(graph.indptr[:-1] + np.minimum(offsets, np.maximum(deg - 1, 0)),
                     len(graph.indices) - 1)
    return x[graph.indices[pos]]


def synchronous_step(graph: SocialGraph, x: np.ndarray, kernel: InfluenceKernel,
                     activation: ActivationModel, schedule: Schedule,
                     step_index: int) -> np.ndarray:
    """One synchronous sweep; every agent reads the same pre-step opinions."""
    rng = _step_rng(schedule.rng_seed, step_index)
    deg = graph.degrees
    if schedule.source == SOURCE_MEAN:
        x_src = neighbor_means(graph, x)
    else:
        x_src = _random_neighbor_sources(graph, x, rng)
    has_nb = deg > 0
    x_src = np.where(has_nb, x_src, x)

    l = np.asarray(kernel.value(x, x_src), dtype=np.float64)
    stub = _stubborn_mask(kernel, graph.n)
    if stub is not None:
        l = np.where(stub, 0.0, l)

    p = np.asarray(activation.probability(kernel, x, x_src), dtype=np.float64)
    active = (rng.random(graph.n) < p) & has_nb

    new = np.where(active, x + l * (x_src - x), x)
    new = _apply_prejudice(kernel, new)
    if stub is not None:
        new = np.where(stub, x, new)
    if schedule.clamp:
        np.clip(new, 0.0, 1.0, out=new)
    return new


def _async_block(graph: SocialGraph, x: np.ndarray, kernel: InfluenceKernel,
                 activation: ActivationModel, schedule: Schedule,
                 block_index: int) -> np.ndarray:
    """steps_per_observation single-agent updates; draws batched per block.

    Works on plain Python floats via the kernels' scalar twins: the loop is
    the hot path for Deffuant-style runs with hundreds of thousands of
    micro-steps.
    """
    rng = _step_rng(schedule.rng_seed, block_index)
    steps = schedule.steps_per_observation
    agents = rng.integers(0, graph.n, size=steps).tolist()
    nb_draws = rng.random(steps).tolist()
    act_draws = rng.random(steps).tolist()
    xs = x.tolist()
    indptr = graph.indptr.tolist()
    indices = graph.indices.tolist()
    deg = graph.degrees.tolist()
    mean_source = schedule.source == SOURCE_MEAN
    clamp = schedule.clamp
    pj = kernel.prejudice
    stubborn = kernel.stubborn_set
    l_of = kernel.value_scalar
    p_of = activation.probability_scalar
    for k in range(steps):
        i = agents[k]
        di = deg[i]
        if di == 0 or i in stubborn:
            continue
        xi = xs[i]
        base = indptr[i]
        if mean_source:
            x_src = sum(xs[indices[j]] for j in range(base, base + di)) / di
        else:
            x_src = xs[indices[base + int(nb_draws[k] * di)]]
        l = l_of(xi, x_src)
        if l == 0.0 and pj is None:
            continue
        if act_draws[k] >= p_of(l, xi, x_src, i):
            continue
        new = xi + l * (x_src - xi)
        if pj is not None:
            lam = float(pj.susceptibility[i])
            new = lam * new + (1.0 - lam) * float(pj.anchors[i])
        if clamp:
            new = min(1.0, max(0.0, new))
        xs[i] = new
    return np.asarray(xs, dtype=np.float64)


def step(graph: SocialGraph, snapshot: OpinionSnapshot, kernel: InfluenceKernel,
         activation: ActivationModel | None = None,
         schedule: Schedule | None = None, step_index: int = 0) -> OpinionSnapshot:
    """Advance one micro-step (synchronous sweep or one async block step)."""
    activation = activation or AlwaysActive()
    schedule = schedule or Schedule()
    if snapshot.n != graph.n:
        raise ValueError("snapshot does not match graph")
    if schedule.kind == SYNCHRONOUS:
        new = synchronous_step(graph, snapshot.opinions, kernel, activation,
                               schedule, step_index)
    else:
        one = Schedule(kind=schedule.kind, steps_per_observation=1,
                       rng_seed=schedule.rng_seed, source=schedule.source,
                       clamp=schedule.clamp)
        new = _async_block(graph, snapshot.opinions, kernel, activation, one,
                           step_index)
    return OpinionSnapshot(time_index=snapshot.time_index + 1, opinions=new)


def run(graph: SocialGraph, initial: OpinionSnapshot, kernel: InfluenceKernel,
        activation: ActivationModel | None = None,
        schedule: Schedule | None = None, observations: int = 1) -> Trajectory:
    """Run the dynamics, emitting one snapshot per observation.

    The trajectory holds the initial snapshot followed by `observations`
    snapshots spaced steps_per_observation micro-steps apart.
    """
    if observations < 1:
        raise ValueError("observations must be >= 1")
    activation = activation or AlwaysActive()
    schedule = schedule or Schedule()
    if initial.n != graph.n:
        raise ValueError("snapshot does not match graph")

    snaps = [initial]
    x = initial.opinions
    for obs in range(observations):
        if schedule.kind == SYNCHRONOUS:
            for s in range(schedule.steps_per_observation):
                x = synchronous_step(graph, x, kernel, activation, schedule,
                                     obs * schedule.steps_per_observation + s)
        else:
            x = _async_block(graph, x, kernel, activation, schedule, obs)
        snaps.append(OpinionSnapshot(time_index=initial.time_index + obs + 1,
                                     opinions=x))
    provenance = {
        "kernel": repr(kernel),
        "activation": repr(activation),
        "schedule": repr(schedule),
        "graph": graph_hash(graph),
    }
    return Trajectory(snapshots=snaps, provenance=provenance)
