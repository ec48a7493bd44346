"""Generative observer experiment: latent opinions, subscriptions, estimation.

Latent agents hold true opinions that evolve under an influence kernel.
They follow biased information sources: the follow chance rises when a
source's bias is close to the agent's latent opinion and when many friends
already follow it (complex-contagion flavor); unfollowing uses the mirrored
rule. An observer never sees latent opinions: it estimates each agent as
the mean bias of their followed sources plus clamped zero-mean noise, and
the downstream shift analysis runs on those estimates. This is the
apparatus for asking which observed effects (skips, negative shifts,
positive shifts) can arise without the corresponding latent mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    DIR_NEGATIVE,
    DIR_POSITIVE,
    DIR_UNALIGNED,
    SKIP_NA,
    SKIP_YES,
    ShiftTable,
    classify_shifts,
)
from .core import OpinionSnapshot, SocialGraph, Trajectory, segment_sums
from .dynamics import SYNCHRONOUS, Schedule, _async_block, stream_rng, synchronous_step
from .kernels import ActivationModel, AlwaysActive, InfluenceKernel


def default_source_grid(spacing: float = 0.05) -> np.ndarray:
    """Evenly spaced source biases covering [0, 1]; the grid's spacing is
    what makes observed skips possible."""
    count = int(round(1.0 / spacing)) + 1
    return np.linspace(0.0, 1.0, count)


@dataclass(frozen=True)
class SubscriptionParams:
    """Logistic follow/unfollow rule parameters."""

    alpha: float = 8.0       # alignment sensitivity
    beta: float = 4.0        # friend-adoption sensitivity
    threshold: float = 0.2   # alignment distance where the rule is neutral

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")


@dataclass(frozen=True)
class ObserverSpec:
    """Estimator = mean bias of followed sources; noise scale eta >= 0."""

    eta: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be non-negative")


@dataclass(frozen=True)
class LatentDrive:
    """Moderation pressure: latent radicals (|x-0.5| > rho) drift toward
    0.5 at rate m per observation."""

    rho: float = 0.3
    m: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.m <= 1.0:
            raise ValueError("m must be in [0, 1]")
        if not 0.0 <= self.rho < 0.5:
            raise ValueError("rho must be in [0, 0.5)")


@dataclass
class SubscriptionState:
    """Boolean follow matrix (agents x sources) plus observation bounds."""

    matrix: np.ndarray
    min_follows: int = 10
    max_follows: int = 200

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=bool)
        if self.min_follows < 1 or self.max_follows < self.min_follows:
            raise ValueError("need 1 <= min_follows <= max_follows")

    @property
    def counts(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def observable(self) -> np.ndarray:
        c = self.counts
        return (c >= self.min_follows) & (c <= self.max_follows)


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])  # branch per sign: no overflow at extreme |z|
    out[~pos] = ez / (1.0 + ez)
    return out


def friend_follow_fractions(graph: SocialGraph, matrix: np.ndarray) -> np.ndarray:
    """Per (agent, source): fraction of the agent's friends following it."""
    n, m = matrix.shape
    deg = np.maximum(graph.degrees, 1).astype(np.float64)
    out = np.empty((n, m))
    per_edge = matrix[graph.indices].astype(np.float64)
    for s in range(m):
        out[:, s] = segment_sums(per_edge[:, s], graph) / deg
    return out


def subscription_step(latent: np.ndarray, source_biases: np.ndarray,
                      graph: SocialGraph, state: SubscriptionState,
                      params: SubscriptionParams,
                      rng: np.random.Generator) -> SubscriptionState:
    """One follow/unfollow sweep driven by latent opinions (never estimates).

    follow:   p = sigmoid(alpha*(threshold - |bias - x|) + beta*f)
    unfollow: p = sigmoid(alpha*(|bias - x| - threshold) - beta*f)
    where f is the fraction of friends currently following the source.
    """
    if len(source_biases) == 0:
        raise ValueError("source set is empty")
    d = np.abs(source_biases[None, :] - latent[:, None])
    f = friend_follow_fractions(graph, state.matrix)
    p_follow = _sigmoid(params.alpha * (params.threshold - d) + params.beta * f)
    p_unfollow = _sigmoid(params.alpha * (d - params.threshold) - params.beta * f)
    draws = rng.random(d.shape)
    new = np.where(state.matrix, draws >= p_unfollow, draws < p_follow)
    return SubscriptionState(matrix=new, min_follows=state.min_follows,
                             max_follows=state.max_follows)


def observe(state: SubscriptionState, source_biases: np.ndarray,
            spec: ObserverSpec, rng: np.random.Generator,
            time_index: int = 1) -> tuple:
    """Estimate opinions from subscriptions; returns (snapshot, observable).

    Unobservable agents (subscription count outside the bounds) carry NaN
    in the snapshot and False in the mask.
    """
    counts = state.counts
    observable = state.observable
    with np.errstate(invalid="ignore", divide="ignore"):
        est = (state.matrix.astype(np.float64) @ source_biases) / counts
    if spec.eta > 0:
        est = est + rng.normal(0.0, spec.eta, size=len(est))
    est = np.clip(est, 0.0, 1.0)
    est[~observable] = np.nan
    return OpinionSnapshot(time_index=time_index, opinions=est), observable


# ---------------------------------------------------------------------------
# Full experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObserverExperimentConfig:
    kernel: InfluenceKernel
    activation: ActivationModel = field(default_factory=AlwaysActive)
    schedule: Schedule = field(default_factory=Schedule)
    subscription: SubscriptionParams = field(default_factory=SubscriptionParams)
    observer: ObserverSpec = field(default_factory=ObserverSpec)
    drive: LatentDrive = field(default_factory=LatentDrive)
    source_biases: np.ndarray = field(default_factory=default_source_grid)
    observations: int = 2
    subs_steps_per_observation: int = 1
    init_subs_steps: int = 3
    min_follows: int = 1
    max_follows: int = 200
    bias_drift: float = 0.0  # per-observation additive drift shared by all sources

    def __post_init__(self):
        if self.observations < 2:
            raise ValueError("need at least two observations")
        object.__setattr__(self, "source_biases",
                           np.asarray(self.source_biases, dtype=np.float64))


CONFUSION_CLASSES = ("static", "pos_nonskip", "pos_skip", "negative", "unaligned")


def _class_codes(table: ShiftTable) -> np.ndarray:
    codes = np.zeros(len(table), dtype=np.int8)
    codes[(table.direction == DIR_POSITIVE) & (table.skip_class != SKIP_YES)] = 1
    codes[table.skip_class == SKIP_YES] = 2
    codes[table.direction == DIR_NEGATIVE] = 3
    codes[table.direction == DIR_UNALIGNED] = 4
    return codes


def shift_confusion(latent_table: ShiftTable, observed_table: ShiftTable) -> np.ndarray:
    """5x5 counts: rows latent class, columns observed class, over the
    agents present in both tables."""
    common, li, oi = np.intersect1d(latent_table.agents, observed_table.agents,
                                    return_indices=True)
    lat = _class_codes(latent_table)[li]
    obs = _class_codes(observed_table)[oi]
    counts = np.zeros((5, 5), dtype=np.int64)
    np.add.at(counts, (lat, obs), 1)
    return counts


@dataclass
class ObserverExperimentReport:
    latent: Trajectory
    observed: Trajectory
    observable_all: np.ndarray
    subgraph: SocialGraph
    sub_agents: np.ndarray
    latent_tables: list
    observed_tables: list
    confusions: list

    def observed_skip_fraction(self) -> float:
        """Skips among observed positive remarkable shifts, pooled over steps."""
        skips = sum(int((t.skip_class == SKIP_YES).sum()) for t in self.observed_tables)
        pos = sum(int((t.direction == DIR_POSITIVE).sum()) for t in self.observed_tables)
        return skips / pos if pos else 0.0


def _induced_subgraph(graph: SocialGraph, keep_mask: np.ndarray):
    keep_ids = np.flatnonzero(keep_mask)
    remap = -np.ones(graph.n, dtype=np.int64)
    remap[keep_ids] = np.arange(len(keep_ids))
    edges = graph.edge_list()
    sel = keep_mask[edges[:, 0]] & keep_mask[edges[:, 1]]
    sub_edges = remap[edges[sel]]
    sub = SocialGraph.from_edges(len(keep_ids), map(tuple, sub_edges))
    return sub, keep_ids


def run_observed_experiment(graph: SocialGraph, initial: OpinionSnapshot,
                            config: ObserverExperimentConfig,
                            seed: int) -> ObserverExperimentReport:
    """Co-evolve latent opinions and subscriptions, observe at each
    observation, and run the shift analysis on both trajectories.

    The observed dataset mirrors the sampling filter: agents must be
    observable at every observation and keep degree >= 1 in the induced
    subgraph; everyone else is excluded from the observed analysis.
    """
    rng = stream_rng(seed, 1)  # subscription/observation stream
    n = graph.n
    biases = config.source_biases.copy()
    state = SubscriptionState(matrix=np.zeros((n, len(biases)), dtype=bool),
                              min_follows=config.min_follows,
                              max_follows=config.max_follows)
    x = initial.opinions.copy()
    for _ in range(config.init_subs_steps):
        state = subscription_step(x, biases, graph, state, config.subscription, rng)

    latent_snaps = [OpinionSnapshot(time_index=1, opinions=x.copy())]
    obs_snap, obs_mask = observe(state, biases, config.observer, rng, time_index=1)
    observed_snaps = [obs_snap]
    masks = [obs_mask]

    sched = config.schedule
    step_counter = 0
    for k in range(1, config.observations):
        for _ in range(sched.steps_per_observation):
            if sched.kind == SYNCHRONOUS:
                x = synchronous_step(graph, x, config.kernel,
                                     config.activation, sched, step_counter)
            else:
                one = Schedule(kind=sched.kind, steps_per_observation=1,
                               rng_seed=sched.rng_seed, source=sched.source,
                               clamp=sched.clamp)
                x = _async_block(graph, x, config.kernel, config.activation,
                                 one, step_counter)
            step_counter += 1
            if config.drive.m > 0:  # moderation pressure acts every step
                radical = np.abs(x - 0.5) > config.drive.rho
                x[radical] += config.drive.m * (0.5 - x[radical])
        if config.bias_drift != 0.0:
            biases = np.clip(biases + config.bias_drift, 0.0, 1.0)
        for _ in range(config.subs_steps_per_observation):
            state = subscription_step(x, biases, graph, state,
                                      config.subscription, rng)
        latent_snaps.append(OpinionSnapshot(time_index=k + 1, opinions=x.copy()))
        obs_snap, obs_mask = observe(state, biases, config.observer, rng,
                                     time_index=k + 1)
        observed_snaps.append(obs_snap)
        masks.append(obs_mask)

    observable_all = np.logical_and.reduce(masks)
    subgraph, sub_agents = _induced_subgraph(graph, observable_all)

    latent_tables = [classify_shifts(graph, a, b)
                     for a, b in zip(latent_snaps, latent_snaps[1:])]
    observed_tables = []
    for a, b in zip(observed_snaps, observed_snaps[1:]):
        sa = OpinionSnapshot(time_index=a.time_index,
                             opinions=a.opinions[sub_agents])
        sb = OpinionSnapshot(time_index=b.time_index,
                             opinions=b.opinions[sub_agents])
        t = classify_shifts(subgraph, sa, sb)
        t.agents = sub_agents[t.agents]  # report original agent ids
        observed_tables.append(t)

    confusions = [shift_confusion(lt, ot)
                  for lt, ot in zip(latent_tables, observed_tables)]
    return ObserverExperimentReport(
        latent=Trajectory(snapshots=latent_snaps,
                          provenance={"kind": "latent", "seed": seed}),
        observed=Trajectory(snapshots=observed_snaps,
                            provenance={"kind": "observed", "seed": seed}),
        observable_all=observable_all,
        subgraph=subgraph,
        sub_agents=sub_agents,
        latent_tables=latent_tables,
        observed_tables=observed_tables,
        confusions=confusions,
    )
