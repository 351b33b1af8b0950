// In-memory stand-in for the session API, serving scene fixtures captured
// from the real backend. Axis shifts are tracked as net deltas and applied
// to the pristine fixture on every GET, so a +d / -d pair restores the
// original bytes exactly.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import type { SceneDoc } from "../src/schema.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

interface RequestLogEntry {
  method: string;
  path: string;
  body: Record<string, unknown> | null;
}

export class FakeServer {
  revision = 0;
  shifts: Record<string, number> = {};
  hidden = new Set<string>();
  log: RequestLogEntry[] = [];
  private history: Array<{ shifts: Record<string, number>; hidden: Set<string> }> = [];

  install(): void {
    globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) =>
      this.dispatch(String(input), init)) as typeof fetch;
  }

  private snapshot(): void {
    this.history.push({ shifts: { ...this.shifts }, hidden: new Set(this.hidden) });
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private scene(view: string): SceneDoc {
    const doc = fixture<SceneDoc>(`scene_${view}.json`);
    const byIndex = doc.axes.map((a) => this.shifts[a.coordinate] ?? 0);
    doc.axes.forEach((a, i) => {
      a.shift += byIndex[i];
    });
    const xToIndex = new Map(doc.axes.map((a, i) => [a.x, i]));
    doc.primitives = doc.primitives.filter(
      (p) => p.type !== "polyline" || !this.hidden.has(p.case_id));
    for (const p of doc.primitives) {
      if (p.type !== "polyline") continue;
      for (const pt of p.points) {
        const idx = xToIndex.get(pt[0]);
        if (idx !== undefined && byIndex[idx] !== 0) {
          pt[1] -= byIndex[idx] * 500;
        }
      }
    }
    return doc;
  }

  private async dispatch(url: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    this.log.push({ method, path, body });

    if (method === "POST" && path === "/sessions") {
      return this.json(200, fixture("session.json"));
    }
    const m = path.match(/^\/sessions\/([^/]+)(\/.*)$/);
    if (!m) return this.json(404, { detail: "no route" });
    if (m[1] !== "fixture") return this.json(404, { detail: `unknown session ${m[1]}` });
    const rest = m[2];

    if (method === "POST" && body && "revision" in body
        && body.revision !== this.revision) {
      return this.json(409, { detail: `revision: stale (${body.revision} != ${this.revision})` });
    }

    if (rest.startsWith("/scene")) {
      const view = new URLSearchParams(rest.split("?")[1] ?? "").get("view") ?? "polylines";
      return this.json(200, this.scene(view));
    }
    if (rest === "/blocks") {
      return this.json(200, fixture("blocks.json"));
    }
    if (rest === "/hyperblocks" && method === "POST") {
      this.snapshot();
      this.revision += 1;
      const out = fixture<Record<string, unknown>>("grow_response.json");
      return this.json(200, { ...out, revision: this.revision });
    }
    if (rest === "/axis-shift" && method === "POST") {
      this.snapshot();
      const c = String(body!.coordinate);
      this.shifts[c] = (this.shifts[c] ?? 0) + Number(body!.delta);
      if (this.shifts[c] === 0) delete this.shifts[c];
      this.revision += 1;
      return this.json(200, { revision: this.revision, state: `s${this.revision}` });
    }
    if (rest === "/straighten" && method === "POST") {
      this.snapshot();
      this.revision += 1;
      return this.json(200, { revision: this.revision, state: `s${this.revision}` });
    }
    if (rest === "/subsets" && method === "POST") {
      this.snapshot();
      const ids = (body!.case_ids as string[]).map(String);
      if (body!.visible) {
        ids.forEach((i) => this.hidden.delete(i));
      } else {
        ids.forEach((i) => this.hidden.add(i));
      }
      this.revision += 1;
      return this.json(200, { revision: this.revision, state: `s${this.revision}` });
    }
    if (rest === "/undo" && method === "POST") {
      const prev = this.history.pop();
      if (!prev) return this.json(400, { detail: "undo: nothing to undo" });
      this.shifts = prev.shifts;
      this.hidden = prev.hidden;
      this.revision += 1;
      return this.json(200, { revision: this.revision, state: `s${this.revision}` });
    }
    return this.json(404, { detail: `no route ${rest}` });
  }
}

export function wbcTable(): string {
  return readFileSync(join(__dirname, "..", "..", "data", "wbc",
    "breast-cancer-wisconsin.data"), "utf-8");
}
