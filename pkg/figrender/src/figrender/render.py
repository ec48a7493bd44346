"""Turn figure-data CSVs into multi-panel SVG plots.

One panel per panel-key value (holder group or transition), x axis is the
friends'-mean bin center on [0, 1], positive/negative (or stable/unstable)
series distinguished by marker and color. Cells whose support count falls
under the low-support floor are drawn faded; `inf` cells are not plotted at
a fake height but annotated at the top of the panel; `nan` cells are
skipped. Every marker carries data-x/data-y attributes with the exact
source values, so plotted data can be read back from the image.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .schema import FAMILIES, FamilySchema, SchemaError, load_rows
from .svg import SvgDoc

PANEL_W = 220
PANEL_H = 170
MARGIN_L = 52
MARGIN_R = 14
MARGIN_T = 34
MARGIN_B = 42
GAP = 16

SERIES_COLORS = ("#1a1a1a", "#2b6cb0", "#c05621", "#2f855a")
FADED_OPACITY = 0.3
X_TICKS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass(frozen=True)
class FigureSpec:
    """What to render: family, input CSV, output path, support floor."""

    family: str
    input_csv: str
    output_svg: str
    low_support_floor: int = 20
    title: str | None = None

    def schema(self) -> FamilySchema:
        if self.family not in FAMILIES:
            raise SchemaError(f"unknown figure family {self.family!r}")
        return FAMILIES[self.family]


def _nice_ceiling(v: float) -> float:
    if not math.isfinite(v) or v <= 0:
        return 1.0
    exp = math.floor(math.log10(v))
    base = 10.0 ** exp
    for mult in (1.0, 2.0, 5.0, 10.0):
        if v <= mult * base + 1e-12:
            return mult * base
    return 10.0 * base


def _panel_order(rows, key):
    seen = []
    for r in rows:
        if r[key] not in seen:
            seen.append(r[key])
    return seen


def render(spec: FigureSpec) -> bytes:
    """Render one figure; returns the SVG bytes (also written to disk)."""
    schema = spec.schema()
    rows = load_rows(spec.input_csv, schema)
    panels = _panel_order(rows, schema.panel_key)
    groups = (_panel_order(rows, schema.group_key)
              if schema.group_key else [None])

    finite_vals = [r[s.value] for r in rows for s in schema.series
                   if math.isfinite(r[s.value])]
    ymax = _nice_ceiling(1.05 * max(finite_vals)) if finite_vals else 1.0

    n_panels = max(1, len(panels))
    width = MARGIN_L + n_panels * PANEL_W + (n_panels - 1) * GAP + MARGIN_R
    height = MARGIN_T + PANEL_H + MARGIN_B
    doc = SvgDoc(width, height)
    doc.rect(0, 0, width, height, fill="#ffffff")
    title = spec.title or f"{schema.family}: {schema.y_label} vs friends' mean opinion"
    doc.text(width / 2, 16, title, size=12)

    def sx(px0, v):
        return px0 + v * PANEL_W

    def sy(v):
        return MARGIN_T + PANEL_H * (1.0 - v / ymax)

    for pi, panel in enumerate(panels or ["(empty)"]):
        px0 = MARGIN_L + pi * (PANEL_W + GAP)
        py0 = MARGIN_T
        # frame and group-boundary gridlines
        doc.rect(px0, py0, PANEL_W, PANEL_H, fill="#fbfbfb")
        for t in X_TICKS:
            doc.line(sx(px0, t), py0, sx(px0, t), py0 + PANEL_H,
                     stroke="#dddddd", width=0.5)
            doc.text(sx(px0, t), py0 + PANEL_H + 12, f"{t:g}", size=8)
        for k in range(5):
            doc.line(px0, py0 + PANEL_H * k / 4, px0 + PANEL_W,
                     py0 + PANEL_H * k / 4, stroke="#eeeeee", width=0.5)
        doc.line(px0, py0 + PANEL_H, px0 + PANEL_W, py0 + PANEL_H)
        doc.line(px0, py0, px0, py0 + PANEL_H)
        doc.text(px0 + PANEL_W / 2, py0 + PANEL_H + 26,
                 "friends' mean opinion", size=9)
        doc.text(px0 + PANEL_W / 2, py0 - 6, str(panel), size=10)

        if pi == 0:
            for k in range(5):
                yv = ymax * k / 4
                doc.text(px0 - 6, py0 + PANEL_H * (1 - k / 4) + 3,
                         f"{yv:g}", size=8, anchor="end")
            doc.text(14, py0 + PANEL_H / 2, schema.y_label, size=9)

        panel_rows = [r for r in rows if r[schema.panel_key] == panel]
        series_index = 0
        for gi, grp in enumerate(groups):
            sub = (panel_rows if grp is None else
                   [r for r in panel_rows if r[schema.group_key] == grp])
            for s in schema.series:
                color = SERIES_COLORS[series_index % len(SERIES_COLORS)]
                marker = "circle" if series_index % 2 == 0 else "cross"
                for r in sub:
                    v = r[s.value]
                    if isinstance(v, float) and math.isnan(v):
                        continue
                    center = 0.5 * (r["x_neg_bin_low"] + r["x_neg_bin_high"])
                    x = sx(px0, center)
                    faded = r[s.support] < spec.low_support_floor
                    op = FADED_OPACITY if faded else 1.0
                    data = [("x", float(center)), ("y", float(v)),
                            ("series", s.value)]
                    if math.isinf(v):
                        doc.text(x, py0 + 9, "inf", size=7, fill=color)
                        doc.cross(x, py0 + 13, 2.5, stroke=color, opacity=op,
                                  data=data)
                        continue
                    if marker == "circle":
                        doc.circle(x, sy(v), 2.6, fill=color, opacity=op,
                                   data=data)
                    else:
                        doc.cross(x, sy(v), 2.8, stroke=color, opacity=op,
                                  data=data)
                series_index += 1

    # legend under the panels
    lx = MARGIN_L
    ly = height - 10
    series_index = 0
    for grp in groups:
        for s in schema.series:
            color = SERIES_COLORS[series_index % len(SERIES_COLORS)]
            label = s.label if grp is None else f"{s.label} [{grp}]"
            if series_index % 2 == 0:
                doc.circle(lx, ly - 3, 2.6, fill=color)
            else:
                doc.cross(lx, ly - 3, 2.8, stroke=color)
            doc.text(lx + 6, ly, label, size=8, anchor="start")
            lx += 9 + 6 * len(label)
            series_index += 1

    payload = doc.render()
    out = Path(spec.output_svg)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(payload)
    return payload


def render_bundle(bundle_dir, out_dir=None, low_support_floor=None) -> dict:
    """Render every file listed in a bundle manifest; returns a manifest of
    the images written."""
    bundle = Path(bundle_dir)
    out = Path(out_dir) if out_dir else bundle
    manifest_path = bundle / "bundle_manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"no bundle_manifest.json under {bundle}")
    listing = json.loads(manifest_path.read_text())["files"]
    rendered = {}
    for name in sorted(listing):
        entry = listing[name]
        floor = (low_support_floor if low_support_floor is not None
                 else entry.get("low_support_floor", 20))
        spec = FigureSpec(family=entry["family"],
                          input_csv=str(bundle / name),
                          output_svg=str(out / (Path(name).stem + ".svg")),
                          low_support_floor=floor)
        render(spec)
        rendered[Path(name).stem + ".svg"] = {
            "family": entry["family"], "source": name,
        }
    (out / "render_manifest.json").write_text(
        json.dumps({"images": rendered}, indent=2, sort_keys=True) + "\n")
    return rendered
