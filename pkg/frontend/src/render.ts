// Scene JSON to SVG DOM. All geometry comes from the server; the renderer
// only projects primitives into elements, filters by display state, and
// decorates the selection.

import { BlockDoc, SceneDoc, validateScene } from "./schema.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const TOP_MARGIN = 50;
const AXIS_HEIGHT = 500;

export interface RenderOptions {
  activeCoordinates?: Set<string>;   // display-side axis toggle
  selectedCase?: string | null;
  selectedBlock?: BlockDoc | null;
  showBlockEdges?: boolean;          // min and max lines of the selected block
  showBlockCenter?: boolean;         // its center line
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function fmt(v: number): string {
  return v.toFixed(2);
}

/** Render a validated scene. Throws SchemaError before touching the target
 * when the payload is malformed, so the previous content stays intact. */
export function renderScene(doc: unknown, opts: RenderOptions = {}): SVGSVGElement {
  const scene: SceneDoc = validateScene(doc);
  const keep = axisFilter(scene, opts.activeCoordinates);
  const axisX = scene.axes.map((a) => a.x);

  const svg = el("svg", {
    width: fmt(scene.viewport.width),
    height: fmt(scene.viewport.height),
    viewBox: `0 0 ${fmt(scene.viewport.width)} ${fmt(scene.viewport.height)}`,
  });
  svg.setAttribute("xmlns", SVG_NS);
  svg.appendChild(el("rect", {
    x: 0, y: 0, width: fmt(scene.viewport.width),
    height: fmt(scene.viewport.height), fill: "#ffffff", class: "frame",
  }));

  if (opts.selectedBlock) {
    svg.appendChild(selectionPane(scene, keep, opts));
  }

  for (const p of scene.primitives) {
    if (p.type === "band") {
      if (!keep.indexSet.has(p.axis)) continue;
      const x0 = p.x0 ?? axisX[p.axis] - 14;
      const x1 = p.x1 ?? axisX[p.axis] + 14;
      const grey = Math.round(255 * (1 - p.shade));
      svg.appendChild(el("rect", {
        x: fmt(x0), y: fmt(p.y0), width: fmt(x1 - x0),
        height: fmt(Math.max(p.y1 - p.y0, 0.5)),
        fill: `rgb(${grey},${grey},${grey})`, stroke: "#000000",
        "stroke-width": 0.4, class: "band",
      }));
    } else if (p.type === "segment") {
      if (!keep.indexSet.has(p.axis_from) || !keep.indexSet.has(p.axis_from + 1)) continue;
      svg.appendChild(el("line", {
        x1: fmt(axisX[p.axis_from]), y1: fmt(p.y_from),
        x2: fmt(axisX[p.axis_from + 1]), y2: fmt(p.y_to),
        stroke: p.color, "stroke-width": fmt(p.width),
        "stroke-opacity": 0.65, class: "segment",
      }));
    } else if (p.type === "polyline") {
      const pts = p.points
        .filter((pt) => keep.xSet.has(pt[0]))
        .map((pt) => `${fmt(pt[0])},${fmt(pt[1])}`)
        .join(" ");
      if (!pts) continue;
      const line = el("polyline", {
        points: pts, fill: "none", stroke: p.color,
        "stroke-width": fmt(p.width), class: "case-line",
        "data-case": p.case_id,
      });
      if (opts.selectedCase === p.case_id) {
        line.setAttribute("class", "case-line selected");
        line.setAttribute("stroke", "#000000");
        line.setAttribute("stroke-width", fmt(p.width + 1.5));
      }
      svg.appendChild(line);
    } else if (p.type === "marker") {
      if (!keep.indexSet.has(p.axis)) continue;
      const m = el("g", {
        class: "missing-marker", "data-token": p.token,
        "data-axis": p.axis, "data-cases": p.case_ids.length,
      });
      svg.appendChild(m);
    } else if (p.type === "label") {
      const t = el("text", {
        x: fmt(p.x), y: fmt(p.y), "text-anchor": p.anchor,
        "font-size": 11, class: "scene-label",
      });
      t.textContent = p.text;
      svg.appendChild(t);
    }
  }

  for (const [i, a] of scene.axes.entries()) {
    if (!keep.indexSet.has(i)) continue;
    const y0 = TOP_MARGIN - a.shift * AXIS_HEIGHT;
    const g = el("g", { class: "axis", "data-coordinate": a.coordinate });
    g.appendChild(el("line", {
      x1: fmt(a.x), y1: fmt(y0), x2: fmt(a.x), y2: fmt(y0 + AXIS_HEIGHT),
      stroke: "#333333", "stroke-width": 1,
    }));
    const label = el("text", {
      x: fmt(a.x), y: fmt(TOP_MARGIN - 24), "text-anchor": "middle",
      "font-size": 12, class: "axis-label",
    });
    label.textContent = a.coordinate;
    g.appendChild(label);
    svg.appendChild(g);
  }
  return svg;
}

function axisFilter(scene: SceneDoc, active?: Set<string>) {
  const indexSet = new Set<number>();
  const xSet = new Set<number>();
  scene.axes.forEach((a, i) => {
    if (a.active && (!active || active.has(a.coordinate))) {
      indexSet.add(i);
      xSet.add(a.x);
    }
  });
  return { indexSet, xSet };
}

/** White backdrop plus the selected block's min/center/max lines across the
 * visible axes, per the block-selection display convention. */
function selectionPane(scene: SceneDoc, keep: { indexSet: Set<number> },
                       opts: RenderOptions): SVGGElement {
  const block = opts.selectedBlock!;
  const g = el("g", { class: "selected-block" });
  const axes = scene.axes.filter((_, i) => keep.indexSet.has(i));
  const xs = axes.map((a) => a.x);
  if (xs.length === 0) return g;
  g.appendChild(el("rect", {
    x: fmt(Math.min(...xs) - 30), y: fmt(TOP_MARGIN - 10),
    width: fmt(Math.max(...xs) - Math.min(...xs) + 60),
    height: fmt(AXIS_HEIGHT + 20), fill: "#ffffff", class: "block-backdrop",
  }));
  const lineFor = (pick: (b: { lo: number; hi: number }) => number, cls: string) => {
    const pts = axes
      .filter((a) => block.bounds[a.coordinate] !== undefined)
      .map((a) => {
        const b = block.bounds[a.coordinate];
        const y = TOP_MARGIN + (1 - (pick(b) + a.shift)) * AXIS_HEIGHT;
        return `${fmt(a.x)},${fmt(y)}`;
      })
      .join(" ");
    return el("polyline", {
      points: pts, fill: "none", stroke: "#000000",
      "stroke-width": 1.2, class: cls,
    });
  };
  if (opts.showBlockEdges ?? true) {
    g.appendChild(lineFor((b) => b.lo, "block-min"));
    g.appendChild(lineFor((b) => b.hi, "block-max"));
  }
  if (opts.showBlockCenter ?? true) {
    g.appendChild(lineFor((b) => (b.lo + b.hi) / 2, "block-center"));
  }
  return g;
}
