"""Qualitative curve-shape expectations under each kernel family.

These are seeded Monte-Carlo checks of how the analysis curves should look
when the generating mechanism is known: linear kernels give magnitudes
proportional to opinion divergence, moderated kernels give inverted-U
magnitude curves, and the combined kernel concentrates radicalization in
radical environments with a minimum near the middle.
"""

from collections import defaultdict

import numpy as np
import pytest

from opinionlab import analysis
from opinionlab.analysis import classify_shifts, magnitude_curves, pos_neg_ratio, radicalization_curves
from opinionlab.dynamics import Schedule, run
from opinionlab.generator import HomophilySpec, PopulationSpec, generate
from opinionlab.kernels import (
    AlwaysActive,
    CombinedPositiveNegative,
    LinearPositive,
    ModeratedPositive,
    kernel_value,
)

GROUP_CENTERS = dict(zip(("SL", "L", "M", "C", "SC"),
                         (0.1, 0.3, 0.5, 0.7, 0.9)))


def bin_center(row):
    return 0.5 * (row["x_neg_bin_low"] + row["x_neg_bin_high"])


def test_linear_magnitude_tracks_divergence():
    """mag_pos per cell approximates l0 * |group center - bin center|."""
    l0 = 0.5
    pop = PopulationSpec(n=4000, group_fractions=(0.2,) * 5,
                         mean_degrees=8.0)
    worst = 0.0
    for seed in range(3):
        g, s = generate(pop, HomophilySpec(h=0.7), seed=seed)
        traj = run(g, s, LinearPositive(l0=l0), AlwaysActive(),
                   Schedule(rng_seed=seed), observations=1)
        t = classify_shifts(g, traj[0], traj[1])
        mt = magnitude_curves(t, require_neighbor_stable=False)
        for row in mt.rows:
            if row["n_pos"] >= 30:
                pred = l0 * abs(GROUP_CENTERS[row["xi_group"]]
                                - bin_center(row))
                worst = max(worst, abs(row["mag_pos"] - pred))
    assert worst <= 0.05  # one bin width


def test_moderated_magnitude_has_interior_maximum():
    """Bimodal low-degree population exposes both branches of the lobe."""
    pop = PopulationSpec(n=6000, group_fractions=(0.5, 0.0, 0.0, 0.0, 0.5),
                         mean_degrees=4.0)
    zones = defaultdict(lambda: [0.0, 0])
    for seed in range(10):
        g, s = generate(pop, HomophilySpec(h=0.0), seed=500 + seed)
        traj = run(g, s, ModeratedPositive(peak_distance=0.3, peak_gain=0.5),
                   AlwaysActive(), Schedule(rng_seed=seed), observations=1)
        t = classify_shifts(g, traj[0], traj[1])
        mt = magnitude_curves(t, require_neighbor_stable=False)
        for row in mt.rows:
            if row["n_pos"] > 0:
                d = abs(GROUP_CENTERS[row["xi_group"]] - bin_center(row))
                z = 0 if d < 0.3 else (1 if d < 0.45 else 2)
                zones[z][0] += row["mag_pos"] * row["n_pos"]
                zones[z][1] += row["n_pos"]
    assert all(zones[z][1] > 1000 for z in (0, 1, 2))
    rising, peak, falling = (zones[z][0] / zones[z][1] for z in (0, 1, 2))
    assert peak > rising
    assert peak > falling


def test_radicalization_high_in_radical_environments():
    """P(L -> SL) peaks when friends' mean is radical (either side) and
    bottoms out near the middle."""
    kernel = CombinedPositiveNegative(crossover=0.4, pos_peak_at=0.2,
                                      pos_gain=1.0, neg_peak_at=0.6,
                                      neg_gain=-0.6, cutoff=1.0)
    pop = PopulationSpec(n=5000, group_fractions=(0.3, 0.3, 0.1, 0.1, 0.2),
                         mean_degrees=6.0)
    moves = np.zeros(3)
    totals = np.zeros(3)
    for seed in range(10):
        g, s = generate(pop, HomophilySpec(h=0.35), seed=400 + seed)
        traj = run(g, s, kernel, AlwaysActive(), Schedule(rng_seed=seed),
                   observations=1)
        t = classify_shifts(g, traj[0], traj[1])
        mt = radicalization_curves(t, transitions=(("L", "SL"),),
                                   require_neighbor_stable=False)
        for row in mt.rows:
            c = bin_center(row)
            if c < 0.2:
                z = 0   # own-side radical environment
            elif 0.4 <= c < 0.6:
                z = 1   # moderate environment
            elif c >= 0.6:
                z = 2   # opposite-side environment
            else:
                continue
            moves[z] += row["n_moves"]
            totals[z] += row["n_total"]
    assert totals.min() > 300
    p = moves / totals
    assert p[0] > 5 * p[1] + 0.01
    assert p[2] > 5 * p[1] + 0.01


def test_ratio_positive_below_crossover_negative_beyond():
    """The pure combined kernel puts no negatives below the crossover:
    positive shifts dominate mid distances, negative shifts dominate large
    ones."""
    kernel = CombinedPositiveNegative(crossover=0.4, pos_peak_at=0.2,
                                      pos_gain=0.6, neg_peak_at=0.6,
                                      neg_gain=-0.5, cutoff=1.0)
    pop = PopulationSpec(n=4000, group_fractions=(0.2,) * 5,
                         mean_degrees=8.0)
    n_pos = defaultdict(int)
    n_neg = defaultdict(int)
    for seed in range(8):
        g, s = generate(pop, HomophilySpec(h=0.5), seed=300 + seed)
        traj = run(g, s, kernel, AlwaysActive(),
                   Schedule(rng_seed=seed), observations=1)
        t = classify_shifts(g, traj[0], traj[1])
        mt = pos_neg_ratio(t, require_neighbor_stable=False)
        for row in mt.rows:
            d = abs(GROUP_CENTERS[row["xi_group"]] - bin_center(row))
            z = 0 if d < 0.15 else (1 if d < 0.4 else 2)
            n_pos[z] += row["n_pos"]
            n_neg[z] += row["n_neg"]
    assert n_neg[0] == 0          # no repulsion below the crossover
    assert n_pos[1] > 10 * max(n_neg[1], 1)
    assert n_neg[2] > n_pos[2]    # repulsion dominates past the crossover


def test_ratio_inverted_u_with_measurement_noise():
    """With noisy measurements the ratio curve recovers the inverted-U:
    near-balanced at tiny divergence, positive-dominated at moderate
    divergence, negative-dominated at large divergence.

    Direct Monte-Carlo oracle: draw (x_i, x_-i), apply the kernel
    displacement plus estimation noise, classify, tabulate.
    """
    kernel = CombinedPositiveNegative(crossover=0.4, pos_peak_at=0.2,
                                      pos_gain=0.6, neg_peak_at=0.6,
                                      neg_gain=-0.5, cutoff=1.0)
    rng = np.random.default_rng(4242)
    n = 200_000
    xi = rng.random(n)
    m = rng.random(n)
    l = kernel_value(kernel, xi, m)
    xa = np.clip(xi + l * (m - xi) + rng.normal(0, 0.04, n), 0, 1)
    table = analysis.ShiftTable(np.arange(n), xi, xa, m, np.zeros(n),
                                np.full(n, 2), m)
    mt = pos_neg_ratio(table, require_neighbor_stable=False)
    n_pos = defaultdict(int)
    n_neg = defaultdict(int)
    for row in mt.rows:
        d = abs(GROUP_CENTERS[row["xi_group"]] - bin_center(row))
        z = 0 if d < 0.05 else (1 if d < 0.4 else 2)
        n_pos[z] += row["n_pos"]
        n_neg[z] += row["n_neg"]
    ratios = [n_pos[z] / n_neg[z] for z in (0, 1, 2)]
    assert ratios[1] > 2 * ratios[0]  # interior maximum, by a margin
    assert ratios[1] > 2 * ratios[2]
    assert ratios[2] < 1.0  # repulsion-dominated tail
