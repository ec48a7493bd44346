"""Minimal deterministic SVG document builder.

Elements are emitted in call order with explicitly ordered attributes and
fixed two-decimal coordinate formatting, so identical inputs always yield
identical bytes. No timestamps, ids, or library version strings appear in
the output.
"""

from __future__ import annotations


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


class SvgDoc:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = []

    def _tag(self, name: str, attrs, text=None) -> None:
        body = " ".join(f'{k}="{_fmt(v)}"' for k, v in attrs)
        if text is None:
            self.parts.append(f"<{name} {body}/>")
        else:
            self.parts.append(f"<{name} {body}>{_escape(text)}</{name}>")

    def line(self, x1, y1, x2, y2, stroke="#333333", width=1.0) -> None:
        self._tag("line", [("x1", x1), ("y1", y1), ("x2", x2), ("y2", y2),
                           ("stroke", stroke), ("stroke-width", width)])

    def rect(self, x, y, w, h, fill, opacity=1.0) -> None:
        self._tag("rect", [("x", x), ("y", y), ("width", w), ("height", h),
                           ("fill", fill), ("opacity", opacity)])

    def circle(self, cx, cy, r, fill, opacity=1.0, data=None) -> None:
        attrs = [("cx", cx), ("cy", cy), ("r", r), ("fill", fill),
                 ("opacity", opacity)]
        if data:
            attrs += [(f"data-{k}", repr(v) if isinstance(v, float) else v)
                      for k, v in data]
        self._tag("circle", attrs)

    def cross(self, cx, cy, r, stroke, opacity=1.0, data=None) -> None:
        d = (f"M {_fmt(cx - r)} {_fmt(cy - r)} L {_fmt(cx + r)} {_fmt(cy + r)} "
             f"M {_fmt(cx - r)} {_fmt(cy + r)} L {_fmt(cx + r)} {_fmt(cy - r)}")
        attrs = [("d", d), ("stroke", stroke), ("stroke-width", 1.2),
                 ("fill", "none"), ("opacity", opacity)]
        if data:
            attrs += [(f"data-{k}", repr(v) if isinstance(v, float) else v)
                      for k, v in data]
        self._tag("path", attrs)

    def text(self, x, y, content, size=10, anchor="middle",
             fill="#222222") -> None:
        self._tag("text", [("x", x), ("y", y), ("font-size", size),
                           ("font-family", "sans-serif"),
                           ("text-anchor", anchor), ("fill", fill)], content)

    def render(self) -> bytes:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        return ("\n".join([head] + self.parts + ["</svg>"]) + "\n").encode()


def _escape(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
