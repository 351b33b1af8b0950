// Scene JSON and session API payloads, mirroring the server contract.

export interface AxisSpec {
  coordinate: string;
  x: number;
  shift: number;
  active: boolean;
}

export interface PolylinePrimitive {
  type: "polyline";
  case_id: string;
  points: [number, number][];
  color: string;
  width: number;
}

export interface BandPrimitive {
  type: "band";
  axis: number;
  y0: number;
  y1: number;
  shade: number;
  x0: number | null;
  x1: number | null;
}

export interface SegmentPrimitive {
  type: "segment";
  axis_from: number;
  y_from: number;
  y_to: number;
  width: number;
  count: number;
  color: string;
}

export interface MarkerPrimitive {
  type: "marker";
  axis: number;
  slot: number;
  token: string;
  case_ids: string[];
}

export interface LabelPrimitive {
  type: "label";
  text: string;
  x: number;
  y: number;
  anchor: string;
}

export type Primitive =
  | PolylinePrimitive
  | BandPrimitive
  | SegmentPrimitive
  | MarkerPrimitive
  | LabelPrimitive;

export interface SceneDoc {
  axes: AxisSpec[];
  viewport: { width: number; height: number };
  primitives: Primitive[];
}

export interface SessionInfo {
  id: string;
  revision: number;
  cases: number;
  coordinates: string[];
  classes: string[];
}

export interface MutationResult {
  revision: number;
  state: string;
}

export interface GrowResult extends MutationResult {
  blocks: number;
  pure: number;
  mixed: number;
  sizes: number[];
}

export interface BlockBounds {
  lo: number;
  hi: number;
  lo_open: boolean;
  hi_open: boolean;
}

export interface BlockDoc {
  label: string;
  bounds: Record<string, BlockBounds>;
  members: string[];
  counts: Record<string, number>;
}

export class SchemaError extends Error {}

function fail(path: string, why: string): never {
  throw new SchemaError(`${path}: ${why}`);
}

/** Validate a scene document before any of it touches the DOM, so a bad
 * payload produces an error banner instead of a partial render. */
export function validateScene(doc: unknown): SceneDoc {
  if (typeof doc !== "object" || doc === null) fail("scene", "not an object");
  const d = doc as Record<string, unknown>;
  if (!Array.isArray(d.axes)) fail("axes", "missing or not a list");
  d.axes.forEach((a: unknown, i: number) => {
    const ax = a as Record<string, unknown>;
    if (typeof ax?.coordinate !== "string") fail(`axes[${i}].coordinate`, "expected string");
    if (typeof ax.x !== "number") fail(`axes[${i}].x`, "expected number");
  });
  const vp = d.viewport as Record<string, unknown> | undefined;
  if (typeof vp?.width !== "number" || typeof vp?.height !== "number") {
    fail("viewport", "expected {width, height}");
  }
  if (!Array.isArray(d.primitives)) fail("primitives", "missing or not a list");
  d.primitives.forEach((p: unknown, i: number) => {
    const pr = p as Record<string, unknown>;
    switch (pr?.type) {
      case "polyline":
        if (!Array.isArray(pr.points)) fail(`primitives[${i}].points`, "expected list");
        break;
      case "band":
        if (typeof pr.y0 !== "number" || typeof pr.y1 !== "number") {
          fail(`primitives[${i}]`, "band needs y0/y1");
        }
        break;
      case "segment":
        if (typeof pr.y_from !== "number" || typeof pr.y_to !== "number") {
          fail(`primitives[${i}]`, "segment needs y_from/y_to");
        }
        break;
      case "marker":
        if (typeof pr.token !== "string") fail(`primitives[${i}].token`, "expected string");
        break;
      case "label":
        if (typeof pr.text !== "string") fail(`primitives[${i}].text`, "expected string");
        break;
      default:
        fail(`primitives[${i}].type`, `unknown ${String(pr?.type)}`);
    }
  });
  return doc as SceneDoc;
}
