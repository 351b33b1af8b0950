// Thin client over the session HTTP API. Every mutation carries the mirrored
// revision; a 409 means our mirror is stale and the caller should refetch.

import {
  BlockDoc, GrowResult, MutationResult, SceneDoc, SessionInfo, validateScene,
} from "./schema.js";

export type ViewName = "polylines" | "sidebyside" | "heat" | "frequency";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function expectOk(resp: Response): Promise<unknown> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail = (body as { detail?: string }).detail ?? resp.statusText;
    throw new ApiError(resp.status, detail);
  }
  return body;
}

export class SessionClient {
  constructor(
    private base: string,
    public sessionId: string | null = null,
    public revision = 0,
  ) {}

  private url(path: string): string {
    return `${this.base}/sessions/${this.sessionId}${path}`;
  }

  private async post<T extends MutationResult>(path: string, body: object): Promise<T> {
    const resp = await fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ...body, revision: this.revision }),
    });
    const out = (await expectOk(resp)) as T;
    this.revision = out.revision;
    return out;
  }

  async createSession(table: string, classColumn: number | string,
                      idColumn: number | string | null): Promise<SessionInfo> {
    const resp = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        table, class_column: classColumn, id_column: idColumn,
      }),
    });
    const info = (await expectOk(resp)) as SessionInfo;
    this.sessionId = info.id;
    this.revision = info.revision;
    return info;
  }

  async scene(view: ViewName): Promise<SceneDoc> {
    const resp = await fetch(this.url(`/scene?view=${view}`));
    return validateScene(await expectOk(resp));
  }

  async blocks(): Promise<BlockDoc[]> {
    const resp = await fetch(this.url("/blocks"));
    const doc = (await expectOk(resp)) as { blocks: BlockDoc[] };
    return doc.blocks;
  }

  growBlocks(halfLength: number, impurity = 0): Promise<GrowResult> {
    return this.post("/hyperblocks", {
      half_length: halfLength, impurity_threshold: impurity,
    });
  }

  mergeBlocks(impurity: number): Promise<MutationResult> {
    return this.post("/hyperblocks/merge", { impurity_threshold: impurity });
  }

  shiftAxis(coordinate: string, delta: number): Promise<MutationResult> {
    return this.post("/axis-shift", { coordinate, delta });
  }

  straighten(caseId: string): Promise<MutationResult> {
    return this.post("/straighten", { case_id: caseId });
  }

  setVisibility(caseIds: string[], visible: boolean): Promise<MutationResult> {
    return this.post("/subsets", { case_ids: caseIds, visible });
  }

  undo(): Promise<MutationResult> {
    return this.post("/undo", {});
  }

  async classify(point: Record<string, number>): Promise<{ class: string; rule_used: string }> {
    const resp = await fetch(this.url("/classify"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ point }),
    });
    return (await expectOk(resp)) as { class: string; rule_used: string };
  }
}
