"""Figure-family schemas and strict CSV parsing.

Each family fixes its exact column set; a CSV with an unknown, missing, or
reordered column is rejected with the offending column named. Cell values
use `inf` / `nan` sentinels for non-finite numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


class SchemaError(ValueError):
    """CSV header or cell does not match the family schema."""


@dataclass(frozen=True)
class SeriesSpec:
    """One plotted series: value column, its support column, a label."""

    value: str
    support: str
    label: str


@dataclass(frozen=True)
class FamilySchema:
    family: str
    columns: tuple
    panel_key: str            # column that splits rows into panels
    series: tuple             # SeriesSpec, drawn in order
    group_key: str | None = None  # optional within-panel series split
    y_label: str = ""


STRING_COLUMNS = {"xi_group", "transition", "sigma_stratum"}

FAMILIES = {
    "figure4": FamilySchema(
        family="figure4",
        columns=("xi_group", "x_neg_bin_low", "x_neg_bin_high", "epoc_pos",
                 "epoc_neg", "n_pos", "n_neg", "n_total"),
        panel_key="xi_group",
        series=(SeriesSpec("epoc_pos", "n_total", "positive"),
                SeriesSpec("epoc_neg", "n_total", "negative")),
        y_label="EPOC",
    ),
    "figure5": FamilySchema(
        family="figure5",
        columns=("transition", "sigma_stratum", "x_neg_bin_low",
                 "x_neg_bin_high", "probability", "n_moves", "n_total"),
        panel_key="transition",
        series=(SeriesSpec("probability", "n_total", "probability"),),
        group_key="sigma_stratum",
        y_label="transition probability",
    ),
    "figure6": FamilySchema(
        family="figure6",
        columns=("xi_group", "x_neg_bin_low", "x_neg_bin_high", "mag_pos",
                 "mag_neg", "n_pos", "n_neg", "n_total"),
        panel_key="xi_group",
        series=(SeriesSpec("mag_pos", "n_pos", "positive"),
                SeriesSpec("mag_neg", "n_neg", "negative")),
        y_label="mean shift magnitude",
    ),
    "figure7": FamilySchema(
        family="figure7",
        columns=("xi_group", "x_neg_bin_low", "x_neg_bin_high", "ratio",
                 "n_pos", "n_neg", "n_total"),
        panel_key="xi_group",
        series=(SeriesSpec("ratio", "n_total", "pos/neg ratio"),),
        y_label="positive/negative ratio",
    ),
    "figureB1": FamilySchema(
        family="figureB1",
        columns=("xi_group", "x_neg_bin_low", "x_neg_bin_high",
                 "epoc_stable", "epoc_unstable", "n_stable", "n_unstable",
                 "n_total"),
        panel_key="xi_group",
        series=(SeriesSpec("epoc_stable", "n_stable", "stable friends"),
                SeriesSpec("epoc_unstable", "n_unstable",
                           "shifting friends")),
        y_label="EPOC",
    ),
}


def _parse_cell(column: str, text: str, path, line_no: int):
    if column in STRING_COLUMNS:
        return text
    t = text.strip()
    if t == "inf":
        return math.inf
    if t == "-inf":
        return -math.inf
    if t == "nan":
        return math.nan
    try:
        return int(t) if column.startswith("n_") else float(t)
    except ValueError as exc:
        raise SchemaError(f"{path}:{line_no}: column {column!r}: {exc}") from exc


def load_rows(path, schema: FamilySchema) -> list:
    """Parse and validate one figure CSV into a list of row dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row")
        for col in header:
            if col not in schema.columns:
                raise SchemaError(f"{path}: unknown column {col!r} "
                                  f"for family {schema.family}")
        for col in schema.columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r} "
                                  f"for family {schema.family}")
        if tuple(header) != schema.columns:
            raise SchemaError(f"{path}: column order must be "
                              f"{list(schema.columns)}")
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if len(raw) != len(schema.columns):
                raise SchemaError(f"{path}:{line_no}: expected "
                                  f"{len(schema.columns)} cells, got {len(raw)}")
            rows.append({c: _parse_cell(c, v, path, line_no)
                         for c, v in zip(schema.columns, raw)})
        return rows
