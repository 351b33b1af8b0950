import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderScene } from "../src/render.js";
import { SchemaError, validateScene } from "../src/schema.js";

const FIXTURES = join(__dirname, "fixtures");

function loadScene(view: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, `scene_${view}.json`), "utf-8"));
}

function domDigest(svg: SVGSVGElement) {
  const html = svg.outerHTML;
  return {
    sha256: createHash("sha256").update(html).digest("hex"),
    bytes: html.length,
    polylines: svg.querySelectorAll("polyline.case-line").length,
    bands: svg.querySelectorAll("rect.band").length,
    segments: svg.querySelectorAll("line.segment").length,
    axes: svg.querySelectorAll("g.axis").length,
    labels: svg.querySelectorAll("text.scene-label").length,
  };
}

describe("renderScene", () => {
  it("renders the polylines view golden", () => {
    const svg = renderScene(loadScene("polylines"));
    const digest = domDigest(svg);
    expect(digest.polylines).toBe(699);
    expect(digest.axes).toBe(9);
    expect(digest).toMatchSnapshot();
  });

  it("renders the side-by-side view golden", () => {
    const svg = renderScene(loadScene("sidebyside"));
    const digest = domDigest(svg);
    expect(digest.bands).toBeGreaterThan(0);
    expect(digest).toMatchSnapshot();
  });

  it("renders the heat view golden", () => {
    const svg = renderScene(loadScene("heat"));
    const digest = domDigest(svg);
    expect(digest.bands).toBe(9);
    expect(svg.outerHTML).toMatchSnapshot();
  });

  it("renders the frequency view golden", () => {
    const svg = renderScene(loadScene("frequency"));
    const digest = domDigest(svg);
    expect(digest.segments).toBeGreaterThan(0);
    expect(digest.polylines).toBe(0);
    expect(digest).toMatchSnapshot();
  });

  it("is deterministic for equal input", () => {
    const a = renderScene(loadScene("heat")).outerHTML;
    const b = renderScene(loadScene("heat")).outerHTML;
    expect(a).toBe(b);
  });

  it("filters axes by display state without server round-trip", () => {
    const svg = renderScene(loadScene("polylines"), {
      activeCoordinates: new Set(["x2", "x6"]),
    });
    const axes = Array.from(svg.querySelectorAll("g.axis"))
      .map((a) => (a as SVGElement).dataset.coordinate);
    expect(axes).toEqual(["x2", "x6"]);
    const firstLine = svg.querySelector("polyline.case-line")!;
    expect(firstLine.getAttribute("points")!.split(" ")).toHaveLength(2);
  });

  it("marks the selected case", () => {
    const svg = renderScene(loadScene("polylines"), { selectedCase: "1000025" });
    const sel = svg.querySelector("polyline.selected")!;
    expect(sel.getAttribute("data-case")).toBe("1000025");
    expect(sel.getAttribute("stroke")).toBe("#000000");
  });

  it("draws the selected block pane with toggleable lines", () => {
    const blocks = JSON.parse(
      readFileSync(join(FIXTURES, "blocks.json"), "utf-8")).blocks;
    const withAll = renderScene(loadScene("polylines"), { selectedBlock: blocks[0] });
    expect(withAll.querySelector(".block-backdrop")).not.toBeNull();
    expect(withAll.querySelector(".block-min")).not.toBeNull();
    expect(withAll.querySelector(".block-center")).not.toBeNull();
    const noLines = renderScene(loadScene("polylines"), {
      selectedBlock: blocks[0], showBlockEdges: false, showBlockCenter: false,
    });
    expect(noLines.querySelector(".block-min")).toBeNull();
    expect(noLines.querySelector(".block-center")).toBeNull();
  });

  it("rejects malformed scenes before touching the DOM", () => {
    expect(() => validateScene({ axes: "nope" })).toThrow(SchemaError);
    expect(() => renderScene({ axes: [], viewport: {}, primitives: [] }))
      .toThrow(/viewport/);
    expect(() => renderScene({
      axes: [], viewport: { width: 1, height: 1 },
      primitives: [{ type: "mystery" }],
    })).toThrow(/primitives\[0\]/);
  });

  it("round-trips every marker token verbatim", () => {
    const doc = loadScene("polylines") as { primitives: { type: string }[] };
    const svg = renderScene(doc);
    const markers = svg.querySelectorAll(".missing-marker");
    const tokens = new Set(Array.from(markers)
      .map((m) => (m as SVGElement).dataset.token));
    const fixtureTokens = new Set(
      (doc.primitives.filter((p) => p.type === "marker") as { token: string }[])
        .map((p) => p.token));
    expect(tokens).toEqual(fixtureTokens);
  });
});
