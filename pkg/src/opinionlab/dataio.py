"""Dataset ingestion and export.

Canonical on-disk format: snapshot files are `agent_id,opinion` CSVs, the
edge list is a `src,dst` CSV with one undirected edge per line (either
orientation, duplicates tolerated). Ingestion keeps only the largest
connected component, which also removes friendless agents, and emits a
dense 0-based id remap alongside the original ids for round-tripping.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import OpinionSnapshot, SocialGraph


class IngestError(ValueError):
    """Base class for dataset ingestion failures."""


class MalformedLineError(IngestError):
    def __init__(self, path, line_no, detail):
        super().__init__(f"{path}:{line_no}: {detail}")
        self.path = str(path)
        self.line_no = line_no


class OpinionOutOfRangeError(IngestError):
    def __init__(self, path, line_no, value):
        super().__init__(f"{path}:{line_no}: opinion {value!r} outside [0, 1]")
        self.path = str(path)
        self.line_no = line_no


class DanglingEdgeError(IngestError):
    def __init__(self, path, line_no, agent):
        super().__init__(f"{path}:{line_no}: edge endpoint {agent!r} "
                         f"is not a known agent")
        self.path = str(path)
        self.line_no = line_no


@dataclass
class Dataset:
    """Snapshots + graph over the giant component, with the id remap."""

    graph: SocialGraph
    snapshots: list
    original_ids: np.ndarray     # dense index -> original agent id
    dropped_agents: int          # agents outside the giant component
    dropped_components: int

    @property
    def n(self) -> int:
        return self.graph.n


def _read_snapshot_file(path) -> dict:
    """Parse one `agent_id,opinion` CSV into {original id: opinion}."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1 and row and row[0].strip().lower() == "agent_id":
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise MalformedLineError(path, line_no,
                                         f"expected 2 fields, got {len(row)}")
            try:
                agent = int(row[0])
                value = float(row[1])
            except ValueError as exc:
                raise MalformedLineError(path, line_no, str(exc)) from exc
            if not 0.0 <= value <= 1.0:
                raise OpinionOutOfRangeError(path, line_no, value)
            if agent in out:
                raise MalformedLineError(path, line_no,
                                         f"duplicate agent id {agent}")
            out[agent] = value
    return out


def _read_edge_file(path, known: set) -> list:
    edges = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1 and row and row[0].strip().lower() in ("src", "source"):
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise MalformedLineError(path, line_no,
                                         f"expected 2 fields, got {len(row)}")
            try:
                a = int(row[0])
                b = int(row[1])
            except ValueError as exc:
                raise MalformedLineError(path, line_no, str(exc)) from exc
            for endpoint in (a, b):
                if endpoint not in known:
                    raise DanglingEdgeError(path, line_no, endpoint)
            edges.append((a, b))
    return edges


def ingest(snapshot_paths, edge_path) -> Dataset:
    """Load snapshots and edges, keep the giant component, densify ids."""
    if not snapshot_paths:
        raise IngestError("need at least one snapshot file")
    snapshot_maps = [_read_snapshot_file(p) for p in snapshot_paths]
    ids = sorted(snapshot_maps[0])
    id_set = set(ids)
    for p, m in zip(snapshot_paths[1:], snapshot_maps[1:]):
        if set(m) != id_set:
            raise IngestError(f"{p}: snapshot agent set differs from the first")

    raw_index = {agent: k for k, agent in enumerate(ids)}
    edges = _read_edge_file(edge_path, id_set)
    full = SocialGraph.from_edges(len(ids), [(raw_index[a], raw_index[b])
                                             for a, b in edges])

    labels = full.connected_components()
    sizes = np.bincount(labels)
    giant = int(sizes.argmax())
    keep = labels == giant
    keep_ids = np.flatnonzero(keep)
    remap = -np.ones(full.n, dtype=np.int64)
    remap[keep_ids] = np.arange(len(keep_ids))

    edge_arr = full.edge_list()
    sel = keep[edge_arr[:, 0]]
    graph = SocialGraph.from_edges(len(keep_ids), map(tuple, remap[edge_arr[sel]]))

    original = np.asarray(ids, dtype=np.int64)[keep_ids]
    snapshots = []
    for t, m in enumerate(snapshot_maps, start=1):
        ordered = np.array([m[int(a)] for a in original])
        snapshots.append(OpinionSnapshot(time_index=t, opinions=ordered))
    return Dataset(
        graph=graph,
        snapshots=snapshots,
        original_ids=original,
        dropped_agents=int(full.n - len(keep_ids)),
        dropped_components=int(len(sizes) - 1),
    )


def fmt(value) -> str:
    """Deterministic CSV cell text; floats use repr, inf/nan spelled out."""
    if isinstance(value, float):
        v = float(value)  # numpy scalars repr as np.float64(...)
        if v != v:
            return "nan"
        if v == float("inf"):
            return "inf"
        if v == float("-inf"):
            return "-inf"
        return repr(v)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_snapshot_csv(path, snapshot: OpinionSnapshot,
                       original_ids: np.ndarray | None = None) -> None:
    ids = original_ids if original_ids is not None else np.arange(snapshot.n)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("agent_id,opinion\n")
        for a, v in zip(ids, snapshot.opinions):
            fh.write(f"{int(a)},{fmt(float(v))}\n")


def write_edges_csv(path, graph: SocialGraph,
                    original_ids: np.ndarray | None = None) -> None:
    ids = original_ids if original_ids is not None else np.arange(graph.n)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("src,dst\n")
        for a, b in graph.edge_list():
            fh.write(f"{int(ids[a])},{int(ids[b])}\n")


def export_dataset(dataset: Dataset, out_dir) -> list:
    """Write the canonical files; re-ingesting them reproduces the dataset."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for snap in dataset.snapshots:
        p = out / f"snapshot_{snap.time_index}.csv"
        write_snapshot_csv(p, snap, dataset.original_ids)
        written.append(p)
    p = out / "edges.csv"
    write_edges_csv(p, dataset.graph, dataset.original_ids)
    written.append(p)
    return written


def write_metric_table_csv(path, table) -> None:
    """MetricTable -> CSV with a header row; inf/nan cells spelled out."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join(fmt(row[c]) for c in table.columns) + "\n")
