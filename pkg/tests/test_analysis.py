"""Tests for the shift-classification and metric pipeline.

naive_classify below is the independent oracle: a direct per-agent
transcription of the classification rules using plain Python arithmetic,
kept deliberately separate from the vectorized implementation it checks.
"""

import math

import numpy as np
import pytest

from opinionlab.analysis import (
    DIR_NEGATIVE,
    DIR_NONE,
    DIR_POSITIVE,
    DIR_UNALIGNED,
    SKIP_NA,
    SKIP_NO,
    SKIP_YES,
    ShiftTable,
    classify_shifts,
    epoc_curves,
    epoc_decomposition,
    eq3_inequalities,
    homophily_table,
    magnitude_curves,
    movement_map,
    movement_probability_curves,
    pos_neg_ratio,
    radicalization_curves,
    stability_split_curves,
)
from opinionlab.core import GROUP_LABELS, OpinionSnapshot, SocialGraph


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

def naive_classify(x_before, x_after, nb_before, nb_after):
    """Per-agent re-derivation of the classification rules, pure Python."""
    mean = sum(nb_before) / len(nb_before)
    mean_after = sum(nb_after) / len(nb_after)
    out = {}
    out["remarkable"] = abs(x_after - x_before) > 0.05
    if not out["remarkable"]:
        out["direction"] = "none"
    else:
        product = (x_after - x_before) * (mean - x_before)
        if product > 0:
            out["direction"] = "positive"
        elif product < 0:
            out["direction"] = "negative"
        else:
            out["direction"] = "unaligned"
    if out["direction"] == "positive":
        lo, hi = min(x_before, mean), max(x_before, mean)
        out["skip"] = "non-skipping" if lo <= x_after <= hi else "skipping"
    else:
        out["skip"] = "not-applicable"
    if not out["remarkable"] or x_before == 0.5:
        out["radicalized"] = False
    elif x_before > 0.5:
        out["radicalized"] = x_after > x_before
    else:
        out["radicalized"] = x_after < x_before
    out["neighbor_stable"] = abs(mean_after - mean) < 0.05
    return out


def random_dataset(n, seed, p_edge=0.15, magnitudes="mixed"):
    """Random graph (isolated nodes possible) plus two random snapshots."""
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p_edge]
    g = SocialGraph.from_edges(n, edges)
    xb = rng.random(n)
    if magnitudes == "small":
        xa = np.clip(xb + rng.normal(0, 0.02, n), 0, 1)
    else:
        xa = np.where(rng.random(n) < 0.5, rng.random(n),
                      np.clip(xb + rng.normal(0, 0.03, n), 0, 1))
    sb = OpinionSnapshot(time_index=1, opinions=xb)
    sa = OpinionSnapshot(time_index=2, opinions=xa)
    return g, sb, sa


DIR_NAME = {DIR_NONE: "none", DIR_POSITIVE: "positive",
            DIR_NEGATIVE: "negative", DIR_UNALIGNED: "unaligned"}
SKIP_NAME = {SKIP_NA: "not-applicable", SKIP_NO: "non-skipping",
             SKIP_YES: "skipping"}


class TestClassifyShifts:
    def test_matches_naive_oracle(self):
        total = 0
        for seed in range(25):
            g, sb, sa = random_dataset(100, seed)
            table = classify_shifts(g, sb, sa)
            for k in range(len(table)):
                i = int(table.agents[k])
                nb = g.neighbors(i)
                expect = naive_classify(float(sb.opinions[i]),
                                        float(sa.opinions[i]),
                                        [float(v) for v in sb.opinions[nb]],
                                        [float(v) for v in sa.opinions[nb]])
                assert bool(table.remarkable[k]) == expect["remarkable"]
                assert DIR_NAME[int(table.direction[k])] == expect["direction"]
                assert SKIP_NAME[int(table.skip_class[k])] == expect["skip"]
                assert bool(table.radicalized[k]) == expect["radicalized"]
                assert bool(table.neighbor_stable[k]) == expect["neighbor_stable"]
                total += 1
        assert total > 2000  # 25 seeds x ~100 connected agents

    def test_spec_walkthrough_cases(self):
        # focal agent 0 with two satellites fixing the neighborhood mean
        cases = [
            # (xb, xa, nb mean) -> remarkable, direction, skip
            (0.30, 0.50, 0.45, True, "positive", "skipping"),
            (0.30, 0.25, 0.45, False, "none", "not-applicable"),
            (0.70, 0.85, 0.90, True, "positive", "non-skipping"),
        ]
        for xb, xa, m, remark, direction, skip in cases:
            g = SocialGraph.from_edges(3, [(0, 1), (0, 2)])
            sb = OpinionSnapshot(time_index=1,
                                 opinions=np.array([xb, m, m]))
            sa = OpinionSnapshot(time_index=2,
                                 opinions=np.array([xa, m, m]))
            t = classify_shifts(g, sb, sa)
            k = list(t.agents).index(0)
            assert bool(t.remarkable[k]) == remark
            assert DIR_NAME[int(t.direction[k])] == direction
            assert SKIP_NAME[int(t.skip_class[k])] == skip

    def test_radicalization_toward_edge(self):
        g = SocialGraph.from_edges(3, [(0, 1), (0, 2)])
        sb = OpinionSnapshot(time_index=1, opinions=np.array([0.70, 0.9, 0.9]))
        sa = OpinionSnapshot(time_index=2, opinions=np.array([0.85, 0.9, 0.9]))
        t = classify_shifts(g, sb, sa)
        k = list(t.agents).index(0)
        assert bool(t.radicalized[k])

    def test_half_point_never_radicalizes(self):
        g = SocialGraph.from_edges(3, [(0, 1), (0, 2)])
        sb = OpinionSnapshot(time_index=1, opinions=np.array([0.5, 0.9, 0.9]))
        sa = OpinionSnapshot(time_index=2, opinions=np.array([0.8, 0.9, 0.9]))
        t = classify_shifts(g, sb, sa)
        k = list(t.agents).index(0)
        assert bool(t.remarkable[k])
        assert not bool(t.radicalized[k])

    def test_degree_zero_excluded(self):
        g = SocialGraph.from_edges(4, [(0, 1)])
        sb = OpinionSnapshot(time_index=1, opinions=np.full(4, 0.4))
        sa = OpinionSnapshot(time_index=2, opinions=np.full(4, 0.6))
        t = classify_shifts(g, sb, sa)
        assert set(t.agents.tolist()) == {0, 1}

    def test_reflection_symmetry(self):
        g, sb, sa = random_dataset(80, seed=31)
        t = classify_shifts(g, sb, sa)
        rb = OpinionSnapshot(time_index=1, opinions=1.0 - sb.opinions)
        ra = OpinionSnapshot(time_index=2, opinions=1.0 - sa.opinions)
        rt = classify_shifts(g, rb, ra)
        assert np.array_equal(t.agents, rt.agents)
        assert np.array_equal(t.remarkable, rt.remarkable)
        assert np.array_equal(t.direction, rt.direction)
        assert np.array_equal(t.skip_class, rt.skip_class)
        assert np.array_equal(t.radicalized, rt.radicalized)
        assert np.array_equal(t.group_before, 4 - rt.group_before)
        assert np.array_equal(t.group_after, 4 - rt.group_after)

    def test_record_view(self):
        g, sb, sa = random_dataset(20, seed=33)
        t = classify_shifts(g, sb, sa)
        rec = t[0]
        assert rec.agent == int(t.agents[0])
        assert rec.direction in ("none", "positive", "negative", "unaligned")
        assert len(list(t)) == len(t)


def make_table(xb, xa, mean, mean_after=None, std=None):
    """Build a ShiftTable directly from per-agent data."""
    xb = np.asarray(xb, dtype=np.float64)
    xa = np.asarray(xa, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    if mean_after is None:
        mean_after = mean
    if std is None:
        std = np.zeros_like(xb)
    return ShiftTable(np.arange(len(xb)), xb, xa, mean,
                      np.asarray(std, dtype=np.float64),
                      np.full(len(xb), 2), np.asarray(mean_after, np.float64))


class TestEpocDecomposition:
    def test_simple_counts(self):
        # magnitudes 0.01, 0.06, 0.10, 0.00 -> EPOC = 2/4
        t = make_table(xb=[0.4, 0.4, 0.4, 0.4],
                       xa=[0.41, 0.46, 0.50, 0.40],
                       mean=[0.6, 0.6, 0.6, 0.6])
        d = epoc_decomposition(t, require_neighbor_stable=False)
        assert d.epoc == 0.5
        assert d.n_remarkable == 2

    def test_all_static(self):
        t = make_table(xb=[0.3, 0.7], xa=[0.3, 0.7], mean=[0.5, 0.5])
        d = epoc_decomposition(t, require_neighbor_stable=False)
        assert d.epoc == 0.0
        assert d.epoc_pos == d.epoc_neg == d.unaligned_rate == 0.0

    def test_empty_after_filter_rejected(self):
        t = make_table(xb=[0.3], xa=[0.5], mean=[0.1], mean_after=[0.9])
        with pytest.raises(ValueError):
            epoc_decomposition(t, require_neighbor_stable=True)

    def test_partition_identity_random(self):
        from fractions import Fraction
        for seed in range(200):
            g, sb, sa = random_dataset(50, seed=seed + 1000)
            table = classify_shifts(g, sb, sa)
            if len(table) == 0:
                continue
            d = epoc_decomposition(table, require_neighbor_stable=False)
            assert (d.n_pos_skip + d.n_pos_nonskip + d.n_negative
                    + d.n_unaligned) == d.n_remarkable
            assert (Fraction(d.n_pos_skip, d.n) + Fraction(d.n_pos_nonskip, d.n)
                    + Fraction(d.n_negative, d.n) + Fraction(d.n_unaligned, d.n)
                    ) == Fraction(d.n_remarkable, d.n)

    def test_unaligned_case(self):
        # friends' mean exactly at x_before: zero product
        t = make_table(xb=[0.4], xa=[0.6], mean=[0.4])
        d = epoc_decomposition(t, require_neighbor_stable=False)
        assert d.n_unaligned == 1
        assert d.epoc == 1.0


class TestEpocCurves:
    def test_all_positive_population(self):
        rng = np.random.default_rng(41)
        n = 400
        xb = rng.uniform(0.1, 0.4, n)
        mean = rng.uniform(0.6, 0.9, n)
        xa = xb + 0.1  # always toward the (higher) mean
        table = make_table(xb, xa, mean)
        t = epoc_curves(table, require_neighbor_stable=False)
        for row in t.rows:
            if row["n_total"]:
                assert row["epoc_neg"] == 0.0

    def test_cell_counts_match_filter_oracle(self):
        g, sb, sa = random_dataset(150, seed=43)
        table = classify_shifts(g, sb, sa)
        t = epoc_curves(table, bin_width=0.2, require_neighbor_stable=True)
        stable = table.stable_only()
        for row in t.rows:
            gi = GROUP_LABELS.index(row["xi_group"])
            lo, hi = row["x_neg_bin_low"], row["x_neg_bin_high"]
            sel = (stable.group_before == gi) & (stable.neighbor_mean >= lo)
            sel &= ((stable.neighbor_mean < hi) if hi < 1.0
                    else (stable.neighbor_mean <= 1.0))
            assert row["n_total"] == int(sel.sum())
            assert row["n_pos"] == int((stable.direction[sel] == DIR_POSITIVE).sum())

    def test_low_support_flagging(self):
        t = make_table(xb=[0.1] * 3, xa=[0.3] * 3, mean=[0.35] * 3)
        mt = epoc_curves(t, require_neighbor_stable=False)
        for row in mt.rows:
            assert row["low_support"] == int(row["n_total"] < 20)


class TestEq3:
    def test_no_positive_shifts_undetermined(self):
        t = make_table(xb=[0.3, 0.5], xa=[0.3, 0.5], mean=[0.4, 0.4])
        verdicts = eq3_inequalities(t, require_neighbor_stable=False)
        assert len(verdicts) == 6
        assert all(v.holds is None for v in verdicts)

    def test_symmetric_data_gives_paired_equality(self):
        # a process invariant under x -> 1-x maps each inequality onto its
        # mirror partner with the sides swapped: 1<->6, 2<->5, 3<->4
        rng = np.random.default_rng(47)
        n = 4000
        xb = rng.random(n)
        mean = rng.random(n)
        move = rng.random(n) < 0.3
        xa = np.clip(np.where(move, xb + 0.2 * np.sign(mean - xb), xb), 0, 1)
        xb2 = np.concatenate([xb, 1 - xb])
        xa2 = np.concatenate([xa, 1 - xa])
        m2 = np.concatenate([mean, 1 - mean])
        t = make_table(xb2, xa2, m2)
        verdicts = eq3_inequalities(t, require_neighbor_stable=False)
        for a, b in ((0, 5), (1, 4)):  # sides swap under the mirror
            assert verdicts[a].lhs == pytest.approx(verdicts[b].rhs, abs=1e-9)
            assert verdicts[a].rhs == pytest.approx(verdicts[b].lhs, abs=1e-9)
        # inequalities 3 and 4 are stated with sides pre-mirrored
        assert verdicts[2].lhs == pytest.approx(verdicts[3].lhs, abs=1e-9)
        assert verdicts[2].rhs == pytest.approx(verdicts[3].rhs, abs=1e-9)

    def test_engineered_inequality(self):
        # SLs with L environment never move; Ls with SL environment always do
        xb = [0.1] * 10 + [0.3] * 10
        xa = [0.1] * 10 + [0.1] * 10
        mean = [0.3] * 10 + [0.1] * 10
        t = make_table(xb, xa, mean)
        verdicts = eq3_inequalities(t, require_neighbor_stable=False)
        first = verdicts[0]
        assert first.lhs == 0.0
        assert first.rhs == 1.0
        assert first.holds is True


class TestMovementMap:
    def test_identity_pair(self):
        rng = np.random.default_rng(51)
        xb = rng.random(300)
        t = make_table(xb, xb, rng.random(300))
        mt = movement_map(t)
        from opinionlab.core import group_of
        pops = np.bincount(group_of(xb), minlength=5)
        for g, row in enumerate(mt.rows):
            assert row[f"to_{GROUP_LABELS[g]}"] == pops[g]
            assert row["income"] == 0
            assert row["outcome"] == 0

    def test_margins(self):
        # one L->SL move, one M->L move
        t = make_table(xb=[0.3, 0.5], xa=[0.1, 0.3], mean=[0.0, 0.0])
        mt = movement_map(t)
        rows = {r["group"]: r for r in mt.rows}
        assert rows["L"]["to_SL"] == 1
        assert rows["M"]["to_L"] == 1
        assert rows["SL"]["income"] == 1
        assert rows["L"]["income"] == 1
        assert rows["L"]["outcome"] == 1
        assert rows["M"]["outcome"] == 1

    def test_diagonal_includes_non_remarkable(self):
        t = make_table(xb=[0.45], xa=[0.47], mean=[0.5])
        mt = movement_map(t)
        rows = {r["group"]: r for r in mt.rows}
        assert rows["M"]["to_M"] == 1


class TestMovementProbabilityCurves:
    def test_static_pair_probability_one(self):
        rng = np.random.default_rng(53)
        xb = rng.uniform(0.4, 0.6, 200)
        mean = rng.random(200)
        t = make_table(xb, xb, mean)
        mt = movement_probability_curves(t, bin_width=0.2,
                                         require_neighbor_stable=False)
        for row in mt.rows:
            if row["from_group"] == "M" and row["to_group"] == "M" \
                    and row["n_total"] > 0:
                assert row["probability"] == 1.0

    def test_zone_annotations_sl_to_c(self):
        t = make_table(xb=[0.1], xa=[0.7], mean=[0.5])
        mt = movement_probability_curves(t, bin_width=0.2,
                                         require_neighbor_stable=False)
        zones = {(r["x_neg_bin_low"]): r["zone"] for r in mt.rows
                 if r["from_group"] == "SL" and r["to_group"] == "C"}
        assert zones[0.0] == "own"        # bin inside SL: no zone defined
        assert zones[0.2] == "skipping"   # L
        assert zones[0.4] == "skipping"   # M
        assert zones[0.6] == "non-skipping"
        assert zones[0.8] == "non-skipping"

    def test_no_skipping_zone_for_adjacent_pair(self):
        t = make_table(xb=[0.7], xa=[0.9], mean=[0.5])
        mt = movement_probability_curves(t, bin_width=0.05,
                                         require_neighbor_stable=False)
        zones = {r["zone"] for r in mt.rows
                 if r["from_group"] == "C" and r["to_group"] == "SC"}
        assert "skipping" not in zones

    def test_leftward_zones_mirror(self):
        t = make_table(xb=[0.9], xa=[0.3], mean=[0.5])
        mt = movement_probability_curves(t, bin_width=0.2,
                                         require_neighbor_stable=False)
        zones = {(r["x_neg_bin_low"]): r["zone"] for r in mt.rows
                 if r["from_group"] == "SC" and r["to_group"] == "L"}
        assert zones[0.8] == "own"
        assert zones[0.6] == "skipping"   # C
        assert zones[0.4] == "skipping"   # M
        assert zones[0.2] == "non-skipping"
        assert zones[0.0] == "non-skipping"


class TestRadicalizationCurves:
    def test_static_population_zero(self):
        t = make_table(xb=[0.3] * 50, xa=[0.3] * 50,
                       mean=np.linspace(0, 1, 50))
        mt = radicalization_curves(t, require_neighbor_stable=False)
        for row in mt.rows:
            if row["transition"] == "L->SL" and row["n_total"] > 0:
                assert row["probability"] == 0.0

    def test_transition_validation(self):
        t = make_table(xb=[0.3], xa=[0.3], mean=[0.5])
        with pytest.raises(ValueError):
            radicalization_curves(t, transitions=(("L", "M"),))
        with pytest.raises(ValueError):
            radicalization_curves(t, transitions=(("SL", "C"),))

    def test_counts_with_sigma_strata(self):
        rng = np.random.default_rng(59)
        n = 500
        xb = rng.uniform(0.2, 0.4, n)          # all Ls
        moved = rng.random(n) < 0.4
        xa = np.where(moved, 0.1, xb)
        mean = rng.random(n)
        std = rng.uniform(0, 0.4, n)
        t = make_table(xb, xa, mean, std=std)
        mt = radicalization_curves(t, transitions=(("L", "SL"),),
                                   bin_width=0.5, sigma_edges=(0.2,),
                                   require_neighbor_stable=False)
        # strata partition the records: totals add up
        n_by_stratum = {}
        for row in mt.rows:
            n_by_stratum.setdefault(row["sigma_stratum"], 0)
            n_by_stratum[row["sigma_stratum"]] += row["n_total"]
        assert sum(n_by_stratum.values()) == n
        assert len(n_by_stratum) == 2


class TestMagnitudeCurves:
    def test_constant_magnitude(self):
        rng = np.random.default_rng(61)
        n = 300
        xb = rng.uniform(0.3, 0.5, n)
        mean = np.clip(xb + rng.choice([-0.3, 0.3], n), 0, 1)
        xa = xb + 0.1 * np.sign(mean - xb)
        t = make_table(xb, xa, mean)
        mt = magnitude_curves(t, require_neighbor_stable=False)
        for row in mt.rows:
            if row["n_pos"] > 0:
                assert row["mag_pos"] == pytest.approx(0.1)

    def test_only_remarkable_contribute(self):
        t = make_table(xb=[0.4, 0.4], xa=[0.44, 0.6], mean=[0.9, 0.9])
        mt = magnitude_curves(t, require_neighbor_stable=False)
        total = sum(row["n_pos"] + row["n_neg"] for row in mt.rows)
        assert total == 1


class TestPosNegRatio:
    def test_balanced(self):
        # two agents in the same cell, one positive one negative
        t = make_table(xb=[0.45, 0.45], xa=[0.55, 0.35], mean=[0.52, 0.52])
        mt = pos_neg_ratio(t, bin_width=0.5, require_neighbor_stable=False)
        row = [r for r in mt.rows if r["n_total"] == 2][0]
        assert row["ratio"] == 1.0

    def test_no_negatives_is_inf(self):
        t = make_table(xb=[0.45], xa=[0.55], mean=[0.52])
        mt = pos_neg_ratio(t, bin_width=0.5, require_neighbor_stable=False)
        row = [r for r in mt.rows if r["n_total"] == 1][0]
        assert math.isinf(row["ratio"])

    def test_empty_cell_is_nan(self):
        t = make_table(xb=[0.45], xa=[0.45], mean=[0.52])
        mt = pos_neg_ratio(t, bin_width=0.5, require_neighbor_stable=False)
        assert all(math.isnan(r["ratio"]) for r in mt.rows if r["n_total"] == 0)


class TestHomophilyTable:
    def test_null_row_is_global_fractions(self):
        rng = np.random.default_rng(67)
        n = 500
        ops = rng.random(n)
        g = SocialGraph.from_edges(
            n, [(i, (i + 1) % n) for i in range(n)])
        mt = homophily_table(g, OpinionSnapshot(time_index=1, opinions=ops))
        null = [r for r in mt.rows if r["group"] == "null"][0]
        from opinionlab.core import group_of
        pops = np.bincount(group_of(ops), minlength=5) / n
        for h, lbl in enumerate(GROUP_LABELS):
            assert null[f"frac_{lbl}"] == pytest.approx(pops[h])

    def test_fully_segregated(self):
        # two cliques, one all-SL one all-SC
        edges = ([(i, j) for i in range(5) for j in range(i + 1, 5)]
                 + [(i, j) for i in range(5, 10) for j in range(i + 1, 10)])
        g = SocialGraph.from_edges(10, edges)
        ops = np.array([0.1] * 5 + [0.9] * 5)
        mt = homophily_table(g, OpinionSnapshot(time_index=1, opinions=ops))
        rows = {r["group"]: r for r in mt.rows}
        assert rows["SL"]["frac_SL"] == 1.0
        assert rows["SC"]["frac_SC"] == 1.0

    def test_row_fractions_sum_to_one(self):
        g, sb, _ = random_dataset(200, seed=71, p_edge=0.05)
        mt = homophily_table(g, sb)
        for row in mt.rows:
            if row["n_total"] > 0:
                s = sum(row[f"frac_{lbl}"] for lbl in GROUP_LABELS)
                assert s == pytest.approx(1.0)

    def test_degree_strata(self):
        g, sb, _ = random_dataset(200, seed=73, p_edge=0.05)
        mt = homophily_table(g, sb, degree_strata=True)
        strata = {r["stratum"] for r in mt.rows if r["group"] != "null"}
        assert len(strata) == 3


class TestStabilitySplit:
    def test_partition_of_records(self):
        g, sb, sa = random_dataset(150, seed=79)
        table = classify_shifts(g, sb, sa)
        mt = stability_split_curves(table)
        n = sum(r["n_stable"] + r["n_unstable"] for r in mt.rows)
        assert n == len(table)
