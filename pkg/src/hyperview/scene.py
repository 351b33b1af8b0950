"""Parallel-coordinates scene geometry: polylines, frequency-weighted
segments, quantile bands, side-by-side panes, non-overlap shading, missing
value lanes, vertical axis shifts, and deterministic SVG output.

Scenes keep case geometry columnar (one vertex matrix) so compilation and
axis shifts stay cheap at hundreds of thousands of cases; the primitive
list view is materialized only on export.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, NormalizedDataset, canonical_json

AXIS_SPACING = 100.0
AXIS_HEIGHT = 500.0
TOP_MARGIN = 50.0
SLOT_STEP = 22.0                 # vertical distance between missing-value slots
CLASS_PALETTE = ("#e6c229", "#d81b9c", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd")


@dataclass
class Axis:
    coordinate: str
    x: float
    shift: float = 0.0
    active: bool = True


@dataclass
class Marker:
    axis: int
    slot: int
    token: str
    case_ids: list[str]


@dataclass
class Band:
    axis: int
    y0: float
    y1: float
    shade: float
    x0: Optional[float] = None
    x1: Optional[float] = None


@dataclass
class Segment:
    axis_from: int
    y_from: float
    y_to: float
    width: float
    count: int
    color: str = "#d81b9c"


@dataclass
class Label:
    text: str
    x: float
    y: float
    anchor: str = "middle"


@dataclass
class Scene:
    axes: list[Axis]
    viewport: tuple[float, float]
    vertices_y: np.ndarray               # (n_cases, n_axes) scene units
    case_ids: list[str]
    case_colors: list[str]
    case_widths: np.ndarray
    draw_order: np.ndarray
    visible: np.ndarray                  # bool per case
    bands: list[Band] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)
    labels: list[Label] = field(default_factory=list)
    clamped: bool = False

    @property
    def n_cases(self) -> int:
        return self.vertices_y.shape[0]

    def axis_x(self) -> np.ndarray:
        return np.array([a.x for a in self.axes])

    def value_to_y(self, axis_index: int, value: float) -> float:
        shift = self.axes[axis_index].shift
        return TOP_MARGIN + (1.0 - (value + shift)) * AXIS_HEIGHT

    def iter_primitives(self):
        """Canonical primitive order: bands, segments, polylines in draw
        order, markers, labels."""
        for b in self.bands:
            yield ("band", b)
        for s in self.segments:
            yield ("segment", s)
        xs = self.axis_x()
        for i in self.draw_order:
            if not self.visible[i]:
                continue
            row = self.vertices_y[i]
            pts = [(float(xs[j]), float(row[j]))
                   for j in range(len(self.axes))
                   if self.axes[j].active and not np.isnan(row[j])]
            yield ("polyline", {"case_id": self.case_ids[i], "points": pts,
                                "color": self.case_colors[i],
                                "width": float(self.case_widths[i])})
        for m in self.markers:
            yield ("marker", m)
        for la in self.labels:
            yield ("label", la)

    def to_json_dict(self) -> dict:
        prims = []
        for kind, p in self.iter_primitives():
            if kind == "polyline":
                prims.append({"type": "polyline", **p})
            elif kind == "band":
                prims.append({"type": "band", "axis": p.axis, "y0": p.y0, "y1": p.y1,
                              "shade": p.shade, "x0": p.x0, "x1": p.x1})
            elif kind == "segment":
                prims.append({"type": "segment", "axis_from": p.axis_from,
                              "y_from": p.y_from, "y_to": p.y_to,
                              "width": p.width, "count": p.count, "color": p.color})
            elif kind == "marker":
                prims.append({"type": "marker", "axis": p.axis, "slot": p.slot,
                              "token": p.token, "case_ids": p.case_ids})
            elif kind == "label":
                prims.append({"type": "label", "text": p.text, "x": p.x, "y": p.y,
                              "anchor": p.anchor})
        return {
            "axes": [{"coordinate": a.coordinate, "x": a.x, "shift": a.shift,
                      "active": a.active} for a in self.axes],
            "viewport": {"width": self.viewport[0], "height": self.viewport[1]},
            "primitives": prims,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_json_dict())


def _class_codes(nd: NormalizedDataset) -> np.ndarray:
    order = {c: i for i, c in enumerate(nd.base.class_labels)}
    return np.array([order[c.label] for c in nd.base.cases])


def _case_colors(nd: NormalizedDataset, mode: str) -> list[str]:
    codes = _class_codes(nd)
    if mode == "class":
        return [CLASS_PALETTE[c % len(CLASS_PALETTE)] for c in codes]
    n = len(codes)
    if mode == "C2":
        # golden-angle hue walk: stable distinct colors per line
        hues = (np.arange(n) * 137.508) % 360.0
        return [_hsv_hex(h, 0.75, 0.85) for h in hues]
    if mode == "C3":
        hues = (np.arange(n) * 67.0 + (codes * 180.0)) % 360.0
        return [_hsv_hex(h, 0.9, 0.7) for h in hues]
    raise ValueError(f"unknown color mode {mode!r}")


def _hsv_hex(h: float, s: float, v: float) -> str:
    i = int(h / 60.0) % 6
    f = h / 60.0 - int(h / 60.0)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return "#" + "".join(f"{int(round(c * 255)):02x}" for c in rgb)


def _missing_slots(d: Dataset) -> tuple[dict[tuple[int, str], int], list[str]]:
    """Slot index per (axis, token); slots are shared across axes so one
    token always sits at the same depth. Token order is first appearance."""
    tokens: list[str] = []
    for case in d.cases:
        for cell in case.cells:
            if cell.is_missing and cell.missing_token not in tokens:
                tokens.append(cell.missing_token)
    slot_of = {}
    for j in range(d.n_coordinates):
        for t_idx, tok in enumerate(tokens):
            slot_of[(j, tok)] = t_idx
    return slot_of, tokens


def compile_polylines(nd: NormalizedDataset, *, visible_classes: Optional[set] = None,
                      visible_cases: Optional[Sequence[int]] = None,
                      color_mode: str = "class", top_class: Optional[str] = None,
                      active: Optional[Sequence[bool]] = None,
                      ecv_position: Optional[str] = "below") -> Scene:
    """One polyline per visible case over the active axes.

    Missing cells route their vertex to the token's slot on the missing
    value lane (below the plot by default, above with ``ecv_position="top"``).
    Z-order is class order then case order, with the smallest class drawn
    last unless ``top_class`` overrides it.
    """
    d = nd.base
    n, m = nd.values.shape
    act = np.ones(m, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if act.sum() < 2:
        raise ValueError("compile_polylines needs at least 2 active coordinates")

    axes = [Axis(d.coordinate_names[j], x=AXIS_SPACING / 2 + AXIS_SPACING * k)
            for k, j in enumerate(np.nonzero(act)[0])]
    axis_coords = list(np.nonzero(act)[0])
    width = AXIS_SPACING * len(axes)
    height = TOP_MARGIN * 2 + AXIS_HEIGHT

    vals = nd.values[:, axis_coords]
    y = TOP_MARGIN + (1.0 - vals) * AXIS_HEIGHT

    markers: list[Marker] = []
    labels: list[Label] = []
    if ecv_position is not None:
        slot_of, tokens = _missing_slots(d)
        if tokens:
            lane_base = (height if ecv_position == "below" else 0.0)
            sign = 1.0 if ecv_position == "below" else -1.0
            per_axis_tokens: dict[int, dict[str, list[str]]] = {}
            for i, case in enumerate(d.cases):
                for k, j in enumerate(axis_coords):
                    cell = case.cells[j]
                    if cell.is_missing:
                        slot = slot_of[(j, cell.missing_token)]
                        y[i, k] = lane_base + sign * SLOT_STEP * (slot + 1)
                        per_axis_tokens.setdefault(k, {}).setdefault(
                            cell.missing_token, []).append(case.id)
            for k in sorted(per_axis_tokens):
                for tok in tokens:
                    if tok in per_axis_tokens[k]:
                        slot = slot_of[(axis_coords[k], tok)]
                        sy = lane_base + sign * SLOT_STEP * (slot + 1)
                        markers.append(Marker(axis=k, slot=slot, token=tok,
                                              case_ids=per_axis_tokens[k][tok]))
                        labels.append(Label(text=tok, x=axes[k].x, y=sy))
            height += SLOT_STEP * (len(tokens) + 1) if ecv_position == "below" else 0.0

    codes = _class_codes(nd)
    class_sizes = np.bincount(codes, minlength=len(d.class_labels))
    if top_class is not None:
        top_code = d.class_labels.index(top_class)
    else:
        top_code = int(np.argmin(class_sizes))     # smallest class on top
    z_rank = np.where(codes == top_code, 1, 0)
    draw_order = np.lexsort((np.arange(n), z_rank))

    vis = np.ones(n, dtype=bool)
    if visible_classes is not None:
        vis &= np.array([d.cases[i].label in visible_classes for i in range(n)])
    if visible_cases is not None:
        mask = np.zeros(n, dtype=bool)
        mask[list(visible_cases)] = True
        vis &= mask

    return Scene(
        axes=axes, viewport=(width, height), vertices_y=y,
        case_ids=[c.id for c in d.cases],
        case_colors=_case_colors(nd, color_mode),
        case_widths=np.ones(n),
        draw_order=draw_order, visible=vis,
        markers=markers, labels=labels,
    )


def missing_markers(d: Dataset) -> list[Marker]:
    """Marker lane summary for the dataset: one marker per (axis, token)
    carrying the affected case ids. Tokens are kept verbatim."""
    slot_of, tokens = _missing_slots(d)
    per: dict[tuple[int, str], list[str]] = {}
    for case in d.cases:
        for j, cell in enumerate(case.cells):
            if cell.is_missing:
                per.setdefault((j, cell.missing_token), []).append(case.id)
    return [Marker(axis=j, slot=slot_of[(j, tok)], token=tok, case_ids=ids)
            for (j, tok), ids in sorted(per.items(), key=lambda kv: (kv[0][0], slot_of[kv[0]]))]


def frequency_widths(nd: NormalizedDataset, bins: Optional[int] = None,
                     max_width: float = 14.0,
                     case_rows: Optional[Sequence[int]] = None) -> list[Segment]:
    """Weighted segments between adjacent axes: cases are grouped by their
    (source bin, target bin) pair and each group becomes one segment whose
    width scales with the group count (the largest gets ``max_width``).

    Integer-valued data uses its own value grid as bins; otherwise ten
    equal bins. Incomplete cases are skipped."""
    vals = nd.values if case_rows is None else nd.values[list(case_rows)]
    vals = vals[~np.isnan(vals).any(axis=1)]
    n, m = vals.shape
    raw = np.column_stack([nd.denormalize(j, vals[:, j]) for j in range(m)])
    integer_grid = np.allclose(raw, np.round(raw))
    segments: list[Segment] = []
    groups_all: list[tuple[int, float, float, int]] = []
    for j in range(m - 1):
        if integer_grid:
            pairs = {}
            for a, b in zip(raw[:, j], raw[:, j + 1]):
                pairs[(a, b)] = pairs.get((a, b), 0) + 1
            for (a, b), cnt in sorted(pairs.items()):
                ya = TOP_MARGIN + (1.0 - nd.normalize_value(j, a)) * AXIS_HEIGHT
                yb = TOP_MARGIN + (1.0 - nd.normalize_value(j + 1, b)) * AXIS_HEIGHT
                groups_all.append((j, ya, yb, cnt))
        else:
            nb = bins or 10
            ba = np.clip((vals[:, j] * nb).astype(int), 0, nb - 1)
            bb = np.clip((vals[:, j + 1] * nb).astype(int), 0, nb - 1)
            pairs = {}
            for a, b in zip(ba, bb):
                pairs[(int(a), int(b))] = pairs.get((int(a), int(b)), 0) + 1
            for (a, b), cnt in sorted(pairs.items()):
                ya = TOP_MARGIN + (1.0 - (a + 0.5) / nb) * AXIS_HEIGHT
                yb = TOP_MARGIN + (1.0 - (b + 0.5) / nb) * AXIS_HEIGHT
                groups_all.append((j, ya, yb, cnt))
    if not groups_all:
        return []
    peak = max(g[3] for g in groups_all)
    for j, ya, yb, cnt in groups_all:
        segments.append(Segment(axis_from=j, y_from=ya, y_to=yb,
                                width=max(1.0, max_width * cnt / peak), count=cnt))
    return segments


def quantile_bands(member_values: np.ndarray, shade: float = 0.92) -> list[Band]:
    """Quartile rectangles per axis over the given member rows (normalized
    values). Quartiles interpolate linearly; fewer than four members
    collapse toward a single line."""
    vals = np.asarray(member_values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    bands: list[Band] = []
    qs = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0], axis=0)
    for j in range(vals.shape[1]):
        for q in range(4):
            y0 = TOP_MARGIN + (1.0 - qs[q + 1, j]) * AXIS_HEIGHT
            y1 = TOP_MARGIN + (1.0 - qs[q, j]) * AXIS_HEIGHT
            bands.append(Band(axis=j, y0=min(y0, y1), y1=max(y0, y1), shade=shade))
    return bands


def nonoverlap_heat(blocks) -> np.ndarray:
    """Per coordinate, the fraction of unordered block pairs whose intervals
    are disjoint there. Symmetric in block order and labels."""
    if len(blocks) < 2:
        raise ValueError("heat needs at least 2 blocks")
    d = len(blocks[0].lo)
    shade = np.zeros(d)
    pairs = 0
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            A, B = blocks[a], blocks[b]
            shade += (A.hi < B.lo) | (B.hi < A.lo)
            pairs += 1
    return shade / pairs


def heat_scene(nd: NormalizedDataset, blocks) -> Scene:
    """Heat view: one shaded band per axis spanning the full axis height."""
    scene = compile_polylines(nd, ecv_position=None)
    scene.visible[:] = False
    shades = nonoverlap_heat(blocks)
    for k, a in enumerate(scene.axes):
        j = nd.base.coordinate_names.index(a.coordinate)
        scene.bands.append(Band(axis=k, y0=TOP_MARGIN, y1=TOP_MARGIN + AXIS_HEIGHT,
                                shade=float(shades[j]),
                                x0=a.x - AXIS_SPACING * 0.35, x1=a.x + AXIS_SPACING * 0.35))
        scene.labels.append(Label(text=f"{shades[j]:.3f}", x=a.x, y=TOP_MARGIN - 12))
    return scene


def side_by_side(nd: NormalizedDataset, blocks, tm, pane_width: Optional[float] = None) -> Scene:
    """One horizontally offset pane per block: a miniature plot of its
    members plus the bounds rectangle per axis. Panes are ordered by label
    then size, largest first, and never share geometry."""
    if not blocks:
        raise ValueError("side_by_side needs at least one block")
    d = nd.base
    m = nd.values.shape[1]
    pane_w = pane_width or (AXIS_SPACING * m * 0.5)
    gap = pane_w * 0.08
    order = sorted(range(len(blocks)),
                   key=lambda i: (blocks[i].label_code, -blocks[i].size))
    axes: list[Axis] = []
    bands: list[Band] = []
    verts = []
    ids, colors = [], []
    inner = pane_w / m
    complete_rows = {tuple(np.round(tm.values[r], 12)): r for r in range(len(tm.values))}

    for pane, bi in enumerate(order):
        blk = blocks[bi]
        x0 = pane * (pane_w + gap)
        for j in range(m):
            ax = Axis(coordinate=f"{d.coordinate_names[j]}#{pane}",
                      x=x0 + inner / 2 + inner * j)
            axes.append(ax)
            y_lo = TOP_MARGIN + (1.0 - blk.lo[j]) * AXIS_HEIGHT
            y_hi = TOP_MARGIN + (1.0 - blk.hi[j]) * AXIS_HEIGHT
            bands.append(Band(axis=pane * m + j, y0=min(y_lo, y_hi), y1=max(y_lo, y_hi),
                              shade=0.85, x0=x0 + inner * j + inner * 0.15,
                              x1=x0 + inner * j + inner * 0.85))
        for r in blk.member_rows:
            row_y = TOP_MARGIN + (1.0 - tm.values[int(r)]) * AXIS_HEIGHT
            verts.append((pane, row_y))
            code = int(tm.labels[int(r)])
            ids.append(f"{tm.case_ids[int(r)]}#{pane}")
            colors.append(CLASS_PALETTE[code % len(CLASS_PALETTE)])

    n_axes_total = len(axes)
    y_mat = np.full((len(verts), n_axes_total), np.nan)
    for i, (pane, row_y) in enumerate(verts):
        y_mat[i, pane * m:(pane + 1) * m] = row_y
    width = len(order) * (pane_w + gap)
    scene = Scene(axes=axes, viewport=(width, TOP_MARGIN * 2 + AXIS_HEIGHT),
                  vertices_y=y_mat, case_ids=ids, case_colors=colors,
                  case_widths=np.ones(len(verts)),
                  draw_order=np.arange(len(verts)),
                  visible=np.ones(len(verts), dtype=bool), bands=bands)
    return scene


def apply_axis_shift(scene: Scene, axis_index: int, delta: float) -> Scene:
    """Shift one axis vertically, updating only that axis column of the
    vertex matrix. Shifts clamp to one axis height in either direction."""
    if not scene.axes[axis_index].active:
        raise ValueError("axis is not active")
    new = scene.axes[axis_index].shift + delta
    clamped = min(max(new, -1.0), 1.0)
    applied = clamped - scene.axes[axis_index].shift
    scene.axes[axis_index].shift = clamped
    scene.clamped = clamped != new
    scene.vertices_y[:, axis_index] -= applied * AXIS_HEIGHT
    return scene


def straighten_case(scene: Scene, case_id: str) -> Scene:
    """Choose shifts so the given case's polyline is horizontal at its
    first-axis height; the first axis keeps its current shift."""
    try:
        row = scene.case_ids.index(case_id)
    except ValueError:
        raise ValueError(f"unknown case {case_id!r}") from None
    if np.isnan(scene.vertices_y[row]).any():
        raise ValueError("cannot straighten a case with missing values")
    target = scene.vertices_y[row, 0]
    for j in range(1, len(scene.axes)):
        if not scene.axes[j].active:
            continue
        delta_units = (scene.vertices_y[row, j] - target) / AXIS_HEIGHT
        apply_axis_shift(scene, j, delta_units)
    return scene


def render_svg(scene: Scene) -> bytes:
    """Deterministic SVG: fixed element order, fixed numeric formatting,
    one scene unit per user unit."""
    f = lambda v: f"{v:.2f}"
    w, h = scene.viewport
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(w)}" height="{f(h)}" '
        f'viewBox="0 0 {f(w)} {f(h)}">',
        f'<rect x="0" y="0" width="{f(w)}" height="{f(h)}" fill="#ffffff"/>',
    ]
    xs = scene.axis_x()
    for kind, p in scene.iter_primitives():
        if kind == "band":
            x0 = p.x0 if p.x0 is not None else xs[p.axis] - 14.0
            x1 = p.x1 if p.x1 is not None else xs[p.axis] + 14.0
            grey = int(round(255 * (1.0 - p.shade)))
            fill = f"#{grey:02x}{grey:02x}{grey:02x}"
            out.append(f'<rect x="{f(x0)}" y="{f(p.y0)}" width="{f(x1 - x0)}" '
                       f'height="{f(max(p.y1 - p.y0, 0.5))}" fill="{fill}" '
                       f'stroke="#000000" stroke-width="0.40"/>')
        elif kind == "segment":
            x0, x1 = xs[p.axis_from], xs[p.axis_from + 1]
            out.append(f'<line x1="{f(x0)}" y1="{f(p.y_from)}" x2="{f(x1)}" '
                       f'y2="{f(p.y_to)}" stroke="{p.color}" '
                       f'stroke-width="{f(p.width)}" stroke-opacity="0.65"/>')
        elif kind == "polyline":
            pts = " ".join(f"{f(x)},{f(y)}" for x, y in p["points"])
            out.append(f'<polyline points="{pts}" fill="none" '
                       f'stroke="{p["color"]}" stroke-width="{f(p["width"])}"/>')
        elif kind == "marker":
            out.append(f'<!-- marker axis={p.axis} slot={p.slot} token={_esc(p.token)} '
                       f'cases={len(p.case_ids)} -->')
        elif kind == "label":
            out.append(f'<text x="{f(p.x)}" y="{f(p.y)}" text-anchor="{p.anchor}" '
                       f'font-size="11">{_esc(p.text)}</text>')
    for j, a in enumerate(scene.axes):
        if not a.active:
            continue
        y0 = TOP_MARGIN - a.shift * AXIS_HEIGHT
        out.append(f'<line x1="{f(a.x)}" y1="{f(y0)}" x2="{f(a.x)}" '
                   f'y2="{f(y0 + AXIS_HEIGHT)}" stroke="#333333" stroke-width="1.00"/>')
        out.append(f'<text x="{f(a.x)}" y="{f(TOP_MARGIN - 24)}" text-anchor="middle" '
                   f'font-size="12">{_esc(a.coordinate)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
