"""Command-line surface: simulate / generate / observe / analyze / report.

Every run is driven by a config file plus optional flag overrides, writes
its artifacts under an output directory, and drops a manifest recording the
config hash and seed so outputs are reproducible byte-for-byte.

Exit codes: 0 success, 2 config validation, 3 I/O failure, 4 model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis
from .config import ConfigError, RunConfig, load_config
from .dataio import (
    Dataset,
    IngestError,
    fmt,
    ingest,
    write_edges_csv,
    write_metric_table_csv,
    write_snapshot_csv,
)
from .dynamics import run as run_dynamics
from .generator import assortativity, calibrate_homophily, generate
from .observer import (
    CONFUSION_CLASSES,
    ObserverExperimentConfig,
    run_observed_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_MODEL = 4

FIGURE_FAMILIES = ("figure4", "figure5", "figure6", "figure7", "figureB1")


def _manifest(cfg: RunConfig, out: Path, extra: dict | None = None) -> None:
    payload = {"mode": cfg.mode, "seed": cfg.seed,
               "config_hash": cfg.config_hash()}
    if extra:
        payload.update(extra)
    (out / "manifest.json").write_text(json.dumps(payload, indent=2,
                                                  sort_keys=True) + "\n")


def _load_dataset(cfg: RunConfig) -> Dataset:
    root = Path(cfg.dataset)
    snaps = sorted(root.glob("snapshot_*.csv"),
                   key=lambda p: int(p.stem.split("_")[1]))
    if not snaps:
        raise IngestError(f"no snapshot_*.csv files under {root}")
    return ingest(snaps, root / "edges.csv")


def _cmd_generate(cfg: RunConfig, out: Path) -> None:
    hom = cfg.homophily
    extra = {}
    if hom.target_assortativity is not None:
        cal = calibrate_homophily(cfg.population,
                                  target=hom.target_assortativity,
                                  seed=cfg.seed)
        hom = type(hom)(h=cal.h, target_assortativity=cal.target)
        extra = {"calibrated_h": cal.h, "achieved_assortativity": cal.achieved}
    graph, snapshot = generate(cfg.population, hom, cfg.seed)
    write_edges_csv(out / "edges.csv", graph)
    write_snapshot_csv(out / "snapshot_1.csv", snapshot)
    extra["assortativity"] = assortativity(graph, snapshot)
    extra["n"] = graph.n
    extra["edges"] = graph.edge_count
    _manifest(cfg, out, extra)


def _initial_state(cfg: RunConfig):
    """(graph, snapshot, original_ids) from the dataset or the generator."""
    if cfg.dataset:
        ds = _load_dataset(cfg)
        return ds.graph, ds.snapshots[0], ds.original_ids
    graph, snapshot = generate(cfg.population, cfg.homophily, cfg.seed)
    return graph, snapshot, None


def _cmd_simulate(cfg: RunConfig, out: Path) -> None:
    graph, initial, ids = _initial_state(cfg)
    traj = run_dynamics(graph, initial, cfg.kernel, cfg.activation,
                        cfg.schedule, observations=cfg.observations)
    for snap in traj.snapshots:
        write_snapshot_csv(out / f"snapshot_{snap.time_index}.csv", snap, ids)
    write_edges_csv(out / "edges.csv", graph, ids)
    _manifest(cfg, out, {"observations": cfg.observations,
                         "provenance": traj.provenance})


def _pair_tables(table, cfg: RunConfig) -> dict:
    kw = {"bin_width": cfg.bin_width,
          "require_neighbor_stable": cfg.neighbor_stability_filter}
    tables = {
        "epoc_curves": analysis.epoc_curves(table, **kw),
        "magnitude_curves": analysis.magnitude_curves(table, **kw),
        "pos_neg_ratio": analysis.pos_neg_ratio(table, **kw),
        "radicalization_curves": analysis.radicalization_curves(
            table, sigma_edges=cfg.sigma_edges, **kw),
        "movement_probability_curves": analysis.movement_probability_curves(
            table, **kw),
        "movement_map": analysis.movement_map(table),
        "stability_split_curves": analysis.stability_split_curves(
            table, bin_width=cfg.bin_width),
    }
    for t in tables.values():
        t.low_support_floor = cfg.low_support_floor
        for row in t.rows:
            row["low_support"] = int(row.get(t.support_column, 0)
                                     < cfg.low_support_floor)
    return tables


def _analyze_dataset(cfg: RunConfig, out: Path, write_tables: bool = True):
    ds = _load_dataset(cfg)
    summary = {"n": ds.n, "dropped_agents": ds.dropped_agents,
               "dropped_components": ds.dropped_components, "steps": []}
    all_tables = []
    for a, b in zip(ds.snapshots, ds.snapshots[1:]):
        tag = f"t{a.time_index}_t{b.time_index}"
        table = analysis.classify_shifts(ds.graph, a, b)
        tables = _pair_tables(table, cfg)
        if write_tables:
            for name, t in tables.items():
                write_metric_table_csv(out / f"{name}_{tag}.csv", t)
        dec = analysis.epoc_decomposition(
            table, require_neighbor_stable=cfg.neighbor_stability_filter)
        verdicts = analysis.eq3_inequalities(
            table, require_neighbor_stable=cfg.neighbor_stability_filter)
        summary["steps"].append({
            "step": tag,
            "decomposition": dec.as_dict(),
            "eq3": [v.as_dict() for v in verdicts],
        })
        all_tables.append((tag, table, tables))
    hom = analysis.homophily_table(ds.graph, ds.snapshots[min(1, len(ds.snapshots) - 1)],
                                   degree_strata=True)
    if write_tables:
        write_metric_table_csv(out / "homophily_table.csv", hom)
    (out / "epoc_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return ds, all_tables, summary


def _cmd_analyze(cfg: RunConfig, out: Path) -> None:
    _analyze_dataset(cfg, out)
    _manifest(cfg, out)


def export_figure_data(tables: dict, out_dir, tag: str,
                       low_support_floor: int = 20) -> dict:
    """Write one CSV per figure family; returns the bundle manifest entry.

    Schemas are fixed per family; the renderer validates against them.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plans = {
        "figure4": (tables["epoc_curves"],
                    ["xi_group", "x_neg_bin_low", "x_neg_bin_high",
                     "epoc_pos", "epoc_neg", "n_pos", "n_neg", "n_total"]),
        "figure5": (tables["radicalization_curves"],
                    ["transition", "sigma_stratum", "x_neg_bin_low",
                     "x_neg_bin_high", "probability", "n_moves", "n_total"]),
        "figure6": (tables["magnitude_curves"],
                    ["xi_group", "x_neg_bin_low", "x_neg_bin_high",
                     "mag_pos", "mag_neg", "n_pos", "n_neg", "n_total"]),
        "figure7": (tables["pos_neg_ratio"],
                    ["xi_group", "x_neg_bin_low", "x_neg_bin_high",
                     "ratio", "n_pos", "n_neg", "n_total"]),
        "figureB1": (tables["stability_split_curves"],
                     ["xi_group", "x_neg_bin_low", "x_neg_bin_high",
                      "epoc_stable", "epoc_unstable", "n_stable",
                      "n_unstable", "n_total"]),
    }
    entries = {}
    for family, (table, columns) in plans.items():
        path = out / f"{family}_{tag}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(columns) + "\n")
            for row in table.rows:
                fh.write(",".join(fmt(row[c]) for c in columns) + "\n")
        entries[path.name] = {"family": family, "columns": columns,
                              "step": tag,
                              "low_support_floor": low_support_floor}
    return entries


def _cmd_report(cfg: RunConfig, out: Path) -> None:
    _, all_tables, _ = _analyze_dataset(cfg, out, write_tables=False)
    bundle = {}
    for tag, _, tables in all_tables:
        bundle.update(export_figure_data(tables, out, tag,
                                         cfg.low_support_floor))
    (out / "bundle_manifest.json").write_text(
        json.dumps({"files": bundle}, indent=2, sort_keys=True) + "\n")
    _manifest(cfg, out, {"figure_families": list(FIGURE_FAMILIES)})


def _cmd_observe(cfg: RunConfig, out: Path) -> None:
    graph, initial, _ = _initial_state(cfg)
    exp = ObserverExperimentConfig(
        kernel=cfg.kernel, activation=cfg.activation, schedule=cfg.schedule,
        subscription=cfg.subscription, observer=cfg.observer, drive=cfg.drive,
        source_biases=cfg.source_biases, observations=max(2, cfg.observations),
        **cfg.observer_extras,
    )
    report = run_observed_experiment(graph, initial, exp, cfg.seed)
    for snap in report.latent.snapshots:
        write_snapshot_csv(out / f"latent_{snap.time_index}.csv", snap)
    for snap in report.observed.snapshots:
        write_snapshot_csv(out / f"observed_{snap.time_index}.csv", snap)
    summary = {"observable_agents": int(report.observable_all.sum()),
               "observed_skip_fraction": report.observed_skip_fraction(),
               "confusions": []}
    for k, conf in enumerate(report.confusions, start=1):
        path = out / f"confusion_t{k}_t{k + 1}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("latent_class," + ",".join(
                f"observed_{c}" for c in CONFUSION_CLASSES) + "\n")
            for i, label in enumerate(CONFUSION_CLASSES):
                fh.write(label + "," + ",".join(str(int(v))
                                                for v in conf[i]) + "\n")
        summary["confusions"].append({"step": f"t{k}_t{k + 1}",
                                      "matrix": conf.tolist()})
    (out / "observer_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _manifest(cfg, out)


_COMMANDS = {
    "generate": _cmd_generate,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "observe": _cmd_observe,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionlab",
        description="Opinion-dynamics simulation and micro-level analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run config file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--dataset", help="dataset directory override")
    return parser


def run_command(argv) -> int:
    """Execute one subcommand; returns the process exit status."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, overrides={
            "mode": args.command, "out": args.out, "seed": args.seed,
            "dataset": args.dataset,
        })
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[cfg.mode](cfg, out)
    except (IngestError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
