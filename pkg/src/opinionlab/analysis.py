"""Micro-level measurement pipeline over snapshot pairs.

Every agent's transition between two consecutive snapshots is classified
once (remarkable / direction / skip / radicalization / neighbor stability)
into a column-oriented ShiftTable; all curves and cross-tabulations are
exact aggregations over that table. Aggregation order is fixed by agent id,
so results do not depend on how the work is partitioned.

Classification rules, with x = opinion before, x' after, m = friends' mean
opinion before:

* remarkable        |x' - x| > 0.05 (strict)
* positive/negative sign of (x' - x) * (m - x); the zero-product case is
                    reported as "unaligned" so the decomposition identity
                    stays an exact partition
* non-skipping      x' inside the closed interval [min(x, m), max(x, m)];
                    skipping otherwise (positive shifts only)
* radicalized       remarkable and moving toward the nearest edge;
                    defined False at x = 0.5 exactly
* neighbor_stable   |m_after - m_before| < 0.05 (strict)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    GROUP_LABELS,
    IdeologicalGroup,
    OpinionSnapshot,
    SocialGraph,
    group_of,
    neighbor_means,
    neighbor_stds,
    segment_sums,
)

# direction codes
DIR_NONE = 0
DIR_POSITIVE = 1
DIR_NEGATIVE = 2
DIR_UNALIGNED = 3
DIRECTION_NAMES = {DIR_NONE: "none", DIR_POSITIVE: "positive",
                   DIR_NEGATIVE: "negative", DIR_UNALIGNED: "unaligned"}

# skip codes
SKIP_NA = 0
SKIP_NO = 1
SKIP_YES = 2
SKIP_NAMES = {SKIP_NA: "not-applicable", SKIP_NO: "non-skipping",
              SKIP_YES: "skipping"}

REMARKABLE_THRESHOLD = 0.05
NEIGHBOR_STABLE_THRESHOLD = 0.05
DEFAULT_BIN_WIDTH = 0.05
DEFAULT_LOW_SUPPORT_FLOOR = 20


@dataclass(frozen=True)
class ShiftRecord:
    """One agent's transition between two snapshots."""

    agent: int
    x_before: float
    x_after: float
    neighbor_mean: float
    neighbor_std: float
    degree: int
    neighbor_mean_after: float
    remarkable: bool
    direction: str
    skip_class: str
    radicalized: bool
    group_before: IdeologicalGroup
    group_after: IdeologicalGroup
    neighbor_stable: bool


class ShiftTable:
    """Column-oriented classification of every agent's transition.

    Behaves as a sequence of ShiftRecord; the aggregation operations below
    work directly on the columns.
    """

    def __init__(self, agents, xb, xa, nb_mean, nb_std, degree, nb_mean_after):
        self.agents = agents
        self.x_before = xb
        self.x_after = xa
        self.neighbor_mean = nb_mean
        self.neighbor_std = nb_std
        self.degree = degree
        self.neighbor_mean_after = nb_mean_after

        delta = xa - xb
        self.magnitude = np.abs(delta)
        self.remarkable = self.magnitude > REMARKABLE_THRESHOLD

        product = delta * (nb_mean - xb)
        direction = np.where(product > 0, DIR_POSITIVE,
                             np.where(product < 0, DIR_NEGATIVE, DIR_UNALIGNED))
        self.direction = np.where(self.remarkable, direction, DIR_NONE).astype(np.int8)

        lo = np.minimum(xb, nb_mean)
        hi = np.maximum(xb, nb_mean)
        inside = (xa >= lo) & (xa <= hi)
        skip = np.where(inside, SKIP_NO, SKIP_YES)
        self.skip_class = np.where(self.direction == DIR_POSITIVE, skip,
                                   SKIP_NA).astype(np.int8)

        toward_edge = ((xb > 0.5) & (delta > 0)) | ((xb < 0.5) & (delta < 0))
        self.radicalized = self.remarkable & toward_edge

        self.group_before = group_of(xb)
        self.group_after = group_of(xa)
        self.neighbor_stable = (np.abs(nb_mean_after - nb_mean)
                                < NEIGHBOR_STABLE_THRESHOLD)

    def __len__(self) -> int:
        return len(self.agents)

    def __getitem__(self, k: int) -> ShiftRecord:
        return ShiftRecord(
            agent=int(self.agents[k]),
            x_before=float(self.x_before[k]),
            x_after=float(self.x_after[k]),
            neighbor_mean=float(self.neighbor_mean[k]),
            neighbor_std=float(self.neighbor_std[k]),
            degree=int(self.degree[k]),
            neighbor_mean_after=float(self.neighbor_mean_after[k]),
            remarkable=bool(self.remarkable[k]),
            direction=DIRECTION_NAMES[int(self.direction[k])],
            skip_class=SKIP_NAMES[int(self.skip_class[k])],
            radicalized=bool(self.radicalized[k]),
            group_before=IdeologicalGroup(int(self.group_before[k])),
            group_after=IdeologicalGroup(int(self.group_after[k])),
            neighbor_stable=bool(self.neighbor_stable[k]),
        )

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def subset(self, mask: np.ndarray) -> "ShiftTable":
        t = object.__new__(ShiftTable)
        for name, col in self.__dict__.items():
            setattr(t, name, col[mask])
        return t

    def stable_only(self) -> "ShiftTable":
        return self.subset(self.neighbor_stable)


def classify_shifts(graph: SocialGraph, snap_before: OpinionSnapshot,
                    snap_after: OpinionSnapshot) -> ShiftTable:
    """Classify every agent's transition between the two snapshots.

    Neighborhood statistics come from the before snapshot; the stability
    flag compares friends' means across both. Degree-0 agents are excluded
    (the ingestion filter removes them from real data).
    """
    if snap_before.n != graph.n or snap_after.n != graph.n:
        raise ValueError("snapshots do not match graph")
    deg = graph.degrees
    xb = snap_before.opinions
    xa = snap_after.opinions
    means_b = neighbor_means(graph, xb)
    stds_b = neighbor_stds(graph, xb, means_b)
    means_a = neighbor_means(graph, xa)
    keep = ((deg > 0) & np.isfinite(xb) & np.isfinite(xa)
            & np.isfinite(means_b) & np.isfinite(means_a))
    agents = np.flatnonzero(keep)
    return ShiftTable(agents, xb[keep], xa[keep], means_b[keep], stds_b[keep],
                      deg[keep], means_a[keep])


# ---------------------------------------------------------------------------
# EPOC decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpocDecomposition:
    """EPOC and its exact partition, as counts over a common denominator."""

    n: int
    n_remarkable: int
    n_pos_skip: int
    n_pos_nonskip: int
    n_negative: int
    n_unaligned: int

    @property
    def epoc(self) -> float:
        return self.n_remarkable / self.n

    @property
    def epoc_pos(self) -> float:
        return (self.n_pos_skip + self.n_pos_nonskip) / self.n

    @property
    def epoc_pos_skip(self) -> float:
        return self.n_pos_skip / self.n

    @property
    def epoc_pos_nonskip(self) -> float:
        return self.n_pos_nonskip / self.n

    @property
    def epoc_neg(self) -> float:
        return self.n_negative / self.n

    @property
    def unaligned_rate(self) -> float:
        return self.n_unaligned / self.n

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "n_remarkable": self.n_remarkable,
            "n_pos_skip": self.n_pos_skip,
            "n_pos_nonskip": self.n_pos_nonskip,
            "n_negative": self.n_negative,
            "n_unaligned": self.n_unaligned,
            "epoc": self.epoc,
            "epoc_pos": self.epoc_pos,
            "epoc_pos_skip": self.epoc_pos_skip,
            "epoc_pos_nonskip": self.epoc_pos_nonskip,
            "epoc_neg": self.epoc_neg,
            "unaligned_rate": self.unaligned_rate,
        }


def epoc_decomposition(table: ShiftTable,
                       require_neighbor_stable: bool = True) -> EpocDecomposition:
    """Rates of remarkable movement over the (optionally filtered) population.

    The counts partition exactly: n_remarkable = skip + nonskip + negative
    + unaligned.
    """
    t = table.stable_only() if require_neighbor_stable else table
    if len(t) == 0:
        raise ValueError("no records after filtering")
    return EpocDecomposition(
        n=len(t),
        n_remarkable=int(t.remarkable.sum()),
        n_pos_skip=int((t.skip_class == SKIP_YES).sum()),
        n_pos_nonskip=int((t.skip_class == SKIP_NO).sum()),
        n_negative=int((t.direction == DIR_NEGATIVE).sum()),
        n_unaligned=int((t.direction == DIR_UNALIGNED).sum()),
    )


# ---------------------------------------------------------------------------
# Binned tables
# ---------------------------------------------------------------------------

@dataclass
class MetricTable:
    """Binned curve or cross-tabulation with per-cell sample counts.

    Every row carries its support count (column named by support_column);
    cells under the floor are flagged low_support rather than suppressed.
    """

    name: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    support_column: str = "n_total"
    low_support_floor: int = DEFAULT_LOW_SUPPORT_FLOOR

    def __post_init__(self):
        if "low_support" not in self.columns:
            self.columns = list(self.columns) + ["low_support"]
        for row in self.rows:
            row["low_support"] = int(row.get(self.support_column, 0)
                                     < self.low_support_floor)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


def _bin_index(values: np.ndarray, width: float) -> np.ndarray:
    """Bin [0,1] values into nbins half-open bins; the last bin is closed.

    Edges are the doubles nearest the decimal boundaries so that exact
    boundary values (0.2, 0.6, ...) land with the group intervals.
    """
    nbins = int(round(1.0 / width))
    if abs(nbins * width - 1.0) > 1e-9:
        raise ValueError("bin width must divide 1 evenly")
    edges = np.round(np.arange(1, nbins) * width, 10)
    return np.digitize(values, edges)


def _bin_edges(b: int, width: float) -> tuple:
    return (round(b * width, 10), round((b + 1) * width, 10))


def epoc_curves(table: ShiftTable, bin_width: float = DEFAULT_BIN_WIDTH,
                require_neighbor_stable: bool = True) -> MetricTable:
    """EPOC+ and EPOC- per (holder group, friends'-mean bin).

    Only neighbor-stable records enter (the simultaneous-change filter);
    empty cells are reported with n = 0.
    """
    t = table.stable_only() if require_neighbor_stable else table
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(t.neighbor_mean, bin_width) if len(t) else np.empty(0, np.int64)
    cell = t.group_before * nbins + bins
    size = 5 * nbins
    n_total = np.bincount(cell, minlength=size)
    n_pos = np.bincount(cell[t.direction == DIR_POSITIVE], minlength=size)
    n_neg = np.bincount(cell[t.direction == DIR_NEGATIVE], minlength=size)

    rows = []
    for g in range(5):
        for b in range(nbins):
            k = g * nbins + b
            lo, hi = _bin_edges(b, bin_width)
            tot = int(n_total[k])
            rows.append({
                "xi_group": GROUP_LABELS[g],
                "x_neg_bin_low": lo,
                "x_neg_bin_high": hi,
                "epoc_pos": n_pos[k] / tot if tot else math.nan,
                "epoc_neg": n_neg[k] / tot if tot else math.nan,
                "n_pos": int(n_pos[k]),
                "n_neg": int(n_neg[k]),
                "n_total": tot,
            })
    return MetricTable(
        name="epoc_curves",
        columns=["xi_group", "x_neg_bin_low", "x_neg_bin_high", "epoc_pos",
                 "epoc_neg", "n_pos", "n_neg", "n_total"],
        rows=rows,
        meta={"bin_width": bin_width,
              "neighbor_stable_filter": require_neighbor_stable},
    )


def stability_split_curves(table: ShiftTable,
                           bin_width: float = DEFAULT_BIN_WIDTH) -> MetricTable:
    """EPOC per (holder group, friends'-mean bin), split by whether friends'
    mean stayed put; the moderation-by-neighborhood-change diagnostic."""
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(table.neighbor_mean, bin_width) if len(table) else np.empty(0, np.int64)
    cell = table.group_before * nbins + bins
    size = 5 * nbins
    stable = table.neighbor_stable
    n_stable = np.bincount(cell[stable], minlength=size)
    n_unstable = np.bincount(cell[~stable], minlength=size)
    r_stable = np.bincount(cell[stable & table.remarkable], minlength=size)
    r_unstable = np.bincount(cell[~stable & table.remarkable], minlength=size)

    rows = []
    for g in range(5):
        for b in range(nbins):
            k = g * nbins + b
            lo, hi = _bin_edges(b, bin_width)
            rows.append({
                "xi_group": GROUP_LABELS[g],
                "x_neg_bin_low": lo,
                "x_neg_bin_high": hi,
                "epoc_stable": r_stable[k] / n_stable[k] if n_stable[k] else math.nan,
                "epoc_unstable": r_unstable[k] / n_unstable[k] if n_unstable[k] else math.nan,
                "n_stable": int(n_stable[k]),
                "n_unstable": int(n_unstable[k]),
                "n_total": int(n_stable[k] + n_unstable[k]),
            })
    return MetricTable(
        name="stability_split_curves",
        columns=["xi_group", "x_neg_bin_low", "x_neg_bin_high", "epoc_stable",
                 "epoc_unstable", "n_stable", "n_unstable", "n_total"],
        rows=rows,
        meta={"bin_width": bin_width},
    )


# ---------------------------------------------------------------------------
# Group-pair inequalities
# ---------------------------------------------------------------------------

EQ3_PAIRS = (
    (("SL", "L"), "<", ("L", "SL")),
    (("SL", "M"), "<", ("M", "SL")),
    (("L", "M"), "<", ("M", "L")),
    (("C", "M"), ">", ("M", "C")),
    (("M", "SC"), ">", ("SC", "M")),
    (("C", "SC"), ">", ("SC", "C")),
)


@dataclass(frozen=True)
class InequalityVerdict:
    inequality: str
    lhs: float
    rhs: float
    holds: bool | None  # None = undetermined (an empty cell)

    def as_dict(self) -> dict:
        return {"inequality": self.inequality, "lhs": self.lhs,
                "rhs": self.rhs, "holds": self.holds}


def eq3_inequalities(table: ShiftTable,
                     require_neighbor_stable: bool = True) -> list:
    """The six positive-shift group-pair comparisons, each with its sides.

    EPOC+(x_i = G1, x_-i = G2) is the positive-shift rate over agents whose
    own group is G1 and whose friends'-mean group is G2.
    """
    t = table.stable_only() if require_neighbor_stable else table
    if len(t):
        g_env = group_of(t.neighbor_mean)
        cell = t.group_before * 5 + g_env
        n_cell = np.bincount(cell, minlength=25)
        n_pos = np.bincount(cell[t.direction == DIR_POSITIVE], minlength=25)
    else:
        n_cell = np.zeros(25, dtype=np.int64)
        n_pos = np.zeros(25, dtype=np.int64)

    def rate(gi: str, ge: str) -> float:
        k = GROUP_LABELS.index(gi) * 5 + GROUP_LABELS.index(ge)
        return n_pos[k] / n_cell[k] if n_cell[k] else math.nan

    verdicts = []
    for (l_xi, l_env), op, (r_xi, r_env) in EQ3_PAIRS:
        lhs = float(rate(l_xi, l_env))
        rhs = float(rate(r_xi, r_env))
        if math.isnan(lhs) or math.isnan(rhs):
            holds = None
        elif op == "<":
            holds = bool(lhs < rhs)
        else:
            holds = bool(lhs > rhs)
        label = (f"EPOC+(xi={l_xi}, x-i={l_env}) {op} "
                 f"EPOC+(xi={r_xi}, x-i={r_env})")
        verdicts.append(InequalityVerdict(label, lhs, rhs, holds))
    return verdicts


# ---------------------------------------------------------------------------
# Movement counting (map, probability curves, radicalization)
# ---------------------------------------------------------------------------

def movement_map(table: ShiftTable) -> MetricTable:
    """5x5 group-transition counts with income/outcome margins.

    The diagonal counts stayers whether or not their move was remarkable;
    income(G)/outcome(G) are the off-diagonal column/row sums.
    """
    counts = np.bincount(table.group_before * 5 + table.group_after,
                         minlength=25).reshape(5, 5)
    income = counts.sum(axis=0) - np.diag(counts)
    outcome = counts.sum(axis=1) - np.diag(counts)
    rows = []
    for g in range(5):
        row = {"group": GROUP_LABELS[g]}
        for h in range(5):
            row[f"to_{GROUP_LABELS[h]}"] = int(counts[g, h])
        row["income"] = int(income[g])
        row["outcome"] = int(outcome[g])
        row["n_total"] = int(counts[g].sum())
        rows.append(row)
    return MetricTable(
        name="movement_map",
        columns=["group"] + [f"to_{lbl}" for lbl in GROUP_LABELS]
                + ["income", "outcome", "n_total"],
        rows=rows,
    )


def _zone(g1: int, g2: int, g_bin: int) -> str:
    """Movement-zone label for a friends'-mean bin lying in group g_bin."""
    if g1 == g2:
        return "static"
    if g_bin == g1:
        return "own"
    if g1 < g2:
        if g_bin < g1:
            return "negative"
        if g_bin < g2:
            return "skipping"
        return "non-skipping"
    if g_bin > g1:
        return "negative"
    if g_bin > g2:
        return "skipping"
    return "non-skipping"


def movement_probability_curves(table: ShiftTable,
                                bin_width: float = DEFAULT_BIN_WIDTH,
                                require_neighbor_stable: bool = True) -> MetricTable:
    """P(G1 -> G2) per friends'-mean bin for all 25 ordered group pairs.

    Denominators include every agent starting in G1 (static moves count);
    off-diagonal numerators require the move to be remarkable, the diagonal
    counts stayers as-is. Each bin carries its movement-zone annotation;
    neighboring groups admit no skipping zone by construction.
    """
    t = table.stable_only() if require_neighbor_stable else table
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(t.neighbor_mean, bin_width) if len(t) else np.empty(0, np.int64)
    denom = np.bincount(t.group_before * nbins + bins, minlength=5 * nbins)

    size = 25 * nbins
    cell = (t.group_before * 5 + t.group_after) * nbins + bins
    countable = t.remarkable | (t.group_before == t.group_after)
    numer = np.bincount(cell[countable], minlength=size)

    group_of_bin = [min(int((b + 0.5) * bin_width / 0.2), 4) for b in range(nbins)]
    rows = []
    for g1 in range(5):
        for g2 in range(5):
            for b in range(nbins):
                lo, hi = _bin_edges(b, bin_width)
                n_tot = int(denom[g1 * nbins + b])
                n_mov = int(numer[(g1 * 5 + g2) * nbins + b])
                rows.append({
                    "from_group": GROUP_LABELS[g1],
                    "to_group": GROUP_LABELS[g2],
                    "x_neg_bin_low": lo,
                    "x_neg_bin_high": hi,
                    "probability": n_mov / n_tot if n_tot else math.nan,
                    "n_moves": n_mov,
                    "n_total": n_tot,
                    "zone": _zone(g1, g2, group_of_bin[b]),
                })
    return MetricTable(
        name="movement_probability_curves",
        columns=["from_group", "to_group", "x_neg_bin_low", "x_neg_bin_high",
                 "probability", "n_moves", "n_total", "zone"],
        rows=rows,
        meta={"bin_width": bin_width,
              "neighbor_stable_filter": require_neighbor_stable},
    )


RADICAL_TRANSITIONS = (("L", "SL"), ("C", "SC"))


def radicalization_curves(table: ShiftTable,
                          transitions=RADICAL_TRANSITIONS,
                          bin_width: float = DEFAULT_BIN_WIDTH,
                          sigma_edges=None,
                          require_neighbor_stable: bool = True) -> MetricTable:
    """P(source group makes the named edge-ward transition) per bin.

    Static and non-remarkable source-group agents stay in the denominator.
    Optional sigma_edges adds friends'-diversity strata.
    """
    for src, dst in transitions:
        gs, gd = GROUP_LABELS.index(src), GROUP_LABELS.index(dst)
        if abs(gs - gd) != 1 or abs(gd - 2) <= abs(gs - 2):
            raise ValueError(f"{src}->{dst} is not an edge-ward adjacent move")
    t = table.stable_only() if require_neighbor_stable else table
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(t.neighbor_mean, bin_width) if len(t) else np.empty(0, np.int64)

    if sigma_edges is None:
        strata = [("all", np.ones(len(t), dtype=bool))]
    else:
        edges = [0.0] + list(sigma_edges) + [np.inf]
        strata = []
        for lo, hi in zip(edges, edges[1:]):
            label = f"sigma[{lo},{hi})"
            strata.append((label, (t.neighbor_std >= lo) & (t.neighbor_std < hi)))

    rows = []
    for src, dst in transitions:
        gs, gd = GROUP_LABELS.index(src), GROUP_LABELS.index(dst)
        for label, smask in strata:
            in_src = (t.group_before == gs) & smask
            moved = in_src & (t.group_after == gd) & t.remarkable
            denom = np.bincount(bins[in_src], minlength=nbins)
            numer = np.bincount(bins[moved], minlength=nbins)
            for b in range(nbins):
                lo, hi = _bin_edges(b, bin_width)
                rows.append({
                    "transition": f"{src}->{dst}",
                    "sigma_stratum": label,
                    "x_neg_bin_low": lo,
                    "x_neg_bin_high": hi,
                    "probability": numer[b] / denom[b] if denom[b] else math.nan,
                    "n_moves": int(numer[b]),
                    "n_total": int(denom[b]),
                })
    return MetricTable(
        name="radicalization_curves",
        columns=["transition", "sigma_stratum", "x_neg_bin_low",
                 "x_neg_bin_high", "probability", "n_moves", "n_total"],
        rows=rows,
        meta={"bin_width": bin_width, "sigma_edges": sigma_edges,
              "neighbor_stable_filter": require_neighbor_stable},
    )


def magnitude_curves(table: ShiftTable, bin_width: float = DEFAULT_BIN_WIDTH,
                     require_neighbor_stable: bool = True) -> MetricTable:
    """Mean |shift| of remarkable moves per (holder group, bin, direction)."""
    t = table.stable_only() if require_neighbor_stable else table
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(t.neighbor_mean, bin_width) if len(t) else np.empty(0, np.int64)
    cell = t.group_before * nbins + bins
    size = 5 * nbins

    def mean_for(mask):
        n = np.bincount(cell[mask], minlength=size)
        s = np.bincount(cell[mask], weights=t.magnitude[mask], minlength=size)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > 0, s / np.maximum(n, 1), np.nan), n

    mag_pos, n_pos = mean_for(t.direction == DIR_POSITIVE)
    mag_neg, n_neg = mean_for(t.direction == DIR_NEGATIVE)

    rows = []
    for g in range(5):
        for b in range(nbins):
            k = g * nbins + b
            lo, hi = _bin_edges(b, bin_width)
            rows.append({
                "xi_group": GROUP_LABELS[g],
                "x_neg_bin_low": lo,
                "x_neg_bin_high": hi,
                "mag_pos": float(mag_pos[k]),
                "mag_neg": float(mag_neg[k]),
                "n_pos": int(n_pos[k]),
                "n_neg": int(n_neg[k]),
                "n_total": int(n_pos[k] + n_neg[k]),
            })
    return MetricTable(
        name="magnitude_curves",
        columns=["xi_group", "x_neg_bin_low", "x_neg_bin_high", "mag_pos",
                 "mag_neg", "n_pos", "n_neg", "n_total"],
        rows=rows,
        meta={"bin_width": bin_width,
              "neighbor_stable_filter": require_neighbor_stable},
    )


def pos_neg_ratio(table: ShiftTable, bin_width: float = DEFAULT_BIN_WIDTH,
                  require_neighbor_stable: bool = True) -> MetricTable:
    """count(positive)/count(negative) per (holder group, bin).

    Cells with zero negatives report math.inf; cells with no remarkable
    moves at all report NaN.
    """
    t = table.stable_only() if require_neighbor_stable else table
    nbins = int(round(1.0 / bin_width))
    bins = _bin_index(t.neighbor_mean, bin_width) if len(t) else np.empty(0, np.int64)
    cell = t.group_before * nbins + bins
    size = 5 * nbins
    n_pos = np.bincount(cell[t.direction == DIR_POSITIVE], minlength=size)
    n_neg = np.bincount(cell[t.direction == DIR_NEGATIVE], minlength=size)

    rows = []
    for g in range(5):
        for b in range(nbins):
            k = g * nbins + b
            lo, hi = _bin_edges(b, bin_width)
            if n_neg[k] > 0:
                ratio = n_pos[k] / n_neg[k]
            elif n_pos[k] > 0:
                ratio = math.inf
            else:
                ratio = math.nan
            rows.append({
                "xi_group": GROUP_LABELS[g],
                "x_neg_bin_low": lo,
                "x_neg_bin_high": hi,
                "ratio": ratio,
                "n_pos": int(n_pos[k]),
                "n_neg": int(n_neg[k]),
                "n_total": int(n_pos[k] + n_neg[k]),
            })
    return MetricTable(
        name="pos_neg_ratio",
        columns=["xi_group", "x_neg_bin_low", "x_neg_bin_high", "ratio",
                 "n_pos", "n_neg", "n_total"],
        rows=rows,
        meta={"bin_width": bin_width,
              "neighbor_stable_filter": require_neighbor_stable},
    )


# ---------------------------------------------------------------------------
# Homophily composition
# ---------------------------------------------------------------------------

DEFAULT_DEGREE_STRATA = ((1, 5), (5, 25), (25, None))


def homophily_table(graph: SocialGraph, snapshot: OpinionSnapshot,
                    degree_strata=None) -> MetricTable:
    """Average neighborhood group composition per source group.

    Rows are source groups (optionally crossed with degree strata); the
    null-model row is the global group fractions a random-tie baseline
    would produce.
    """
    groups = group_of(snapshot.opinions)
    deg = graph.degrees
    nbins = 5
    frac = np.zeros((graph.n, nbins))
    for g in range(nbins):
        cnt = segment_sums((groups[graph.indices] == g).astype(np.float64), graph)
        frac[:, g] = cnt / np.maximum(deg, 1)

    if degree_strata is None:
        strata = [("all", deg > 0)]
    else:
        if degree_strata is True:
            degree_strata = DEFAULT_DEGREE_STRATA
        strata = []
        for lo, hi in degree_strata:
            label = f"deg[{lo},{'inf' if hi is None else hi})"
            mask = deg >= lo if hi is None else (deg >= lo) & (deg < hi)
            strata.append((label, mask))

    pops = np.bincount(groups, minlength=5)
    global_frac = pops / pops.sum() if pops.sum() else np.zeros(5)

    rows = []
    for label, smask in strata:
        for g in range(5):
            sel = smask & (groups == g)
            n = int(sel.sum())
            comp = frac[sel].mean(axis=0) if n else np.full(5, np.nan)
            row = {"group": GROUP_LABELS[g], "stratum": label, "n_total": n}
            for h in range(5):
                row[f"frac_{GROUP_LABELS[h]}"] = float(comp[h])
            rows.append(row)
    null_row = {"group": "null", "stratum": "all", "n_total": int(graph.n)}
    for h in range(5):
        null_row[f"frac_{GROUP_LABELS[h]}"] = float(global_frac[h])
    rows.append(null_row)
    return MetricTable(
        name="homophily_table",
        columns=["group", "stratum"] + [f"frac_{lbl}" for lbl in GROUP_LABELS]
                + ["n_total"],
        rows=rows,
        meta={"degree_strata": degree_strata},
    )
