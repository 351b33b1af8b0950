// Explorer wiring: toolbar, dimension tab, subsets table, scene canvas, and
// the pointer interactions that turn gestures into session commands.

import { ApiError, SessionClient, ViewName } from "./api.js";
import { renderScene } from "./render.js";
import { BlockDoc, SchemaError, SceneDoc } from "./schema.js";
import { ViewState, initialState, toggleCoordinate } from "./state.js";

const AXIS_HEIGHT = 500;

export type FrameScheduler = (cb: () => void) => void;

const rafScheduler: FrameScheduler = (cb) => requestAnimationFrame(() => cb());

export class ExplorerApp {
  state: ViewState = initialState();
  coordinates: string[] = [];
  classes: string[] = [];
  caseIds: Record<string, string[]> = {};
  blocks: BlockDoc[] = [];
  private lastScene: SceneDoc | null = null;

  constructor(
    public root: HTMLElement,
    public client: SessionClient,
    private schedule: FrameScheduler = rafScheduler,
  ) {}

  async load(table: string, classColumn: number | string = -1,
             idColumn: number | string | null = null): Promise<void> {
    const info = await this.client.createSession(table, classColumn, idColumn);
    this.coordinates = info.coordinates;
    this.classes = info.classes;
    this.state.serverRevision = info.revision;
    this.buildChrome();
    await this.refreshScene();
  }

  // ---- chrome ---------------------------------------------------------

  private buildChrome(): void {
    this.root.innerHTML = "";
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.hidden = true;
    this.root.appendChild(banner);

    const toolbar = document.createElement("div");
    toolbar.className = "toolbar";
    for (const view of ["polylines", "sidebyside", "heat", "frequency"] as ViewName[]) {
      const b = document.createElement("button");
      b.textContent = view;
      b.dataset.view = view;
      b.addEventListener("click", () => void this.switchView(view));
      toolbar.appendChild(b);
    }
    const grow = document.createElement("button");
    grow.textContent = "grow HB";
    grow.className = "grow-hb";
    grow.addEventListener("click", () => void this.growBlock(0.2));
    toolbar.appendChild(grow);
    const undo = document.createElement("button");
    undo.textContent = "undo";
    undo.className = "undo";
    undo.addEventListener("click", () => void this.undo());
    toolbar.appendChild(undo);
    this.root.appendChild(toolbar);

    const dims = document.createElement("div");
    dims.className = "dimension-tab";
    for (const name of this.coordinates) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = true;
      box.dataset.coordinate = name;
      box.addEventListener("change", () => {
        this.state = toggleCoordinate(this.state, this.coordinates, name);
        this.renderCurrent();
      });
      label.appendChild(box);
      label.append(name);
      dims.appendChild(label);
    }
    this.root.appendChild(dims);

    this.root.appendChild(this.buildSubsetsTable());

    const status = document.createElement("div");
    status.className = "status";
    this.root.appendChild(status);

    const canvas = document.createElement("div");
    canvas.className = "canvas";
    this.root.appendChild(canvas);
  }

  private buildSubsetsTable(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "subsets";
    const select = document.createElement("select");
    for (const cls of this.classes) {
      const opt = document.createElement("option");
      opt.value = cls;
      opt.textContent = cls;
      select.appendChild(opt);
    }
    wrap.appendChild(select);
    const all = document.createElement("button");
    all.textContent = "All";
    all.className = "subsets-all";
    all.addEventListener("click", () => {
      const boxes = wrap.querySelectorAll<HTMLInputElement>("tbody input");
      const everyOn = Array.from(boxes).every((b) => b.checked);
      boxes.forEach((b) => { b.checked = !everyOn; });
    });
    wrap.appendChild(all);
    const apply = document.createElement("button");
    apply.textContent = "Apply";
    apply.className = "subsets-apply";
    apply.addEventListener("click", () => void this.applySubsets());
    wrap.appendChild(apply);
    const table = document.createElement("table");
    table.appendChild(document.createElement("tbody"));
    wrap.appendChild(table);
    return wrap;
  }

  /** Fill the subsets table with the ids of one class; called lazily so the
   * 699-row table only exists when the analyst opens it. */
  populateSubsets(cls: string, ids: string[]): void {
    this.caseIds[cls] = ids;
    const tbody = this.root.querySelector(".subsets tbody")!;
    tbody.innerHTML = "";
    for (const id of ids) {
      const tr = document.createElement("tr");
      const td = document.createElement("td");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = !this.state.hiddenCases.has(id);
      box.dataset.caseId = id;
      td.appendChild(box);
      tr.appendChild(td);
      const name = document.createElement("td");
      name.textContent = id;
      tr.appendChild(name);
      tbody.appendChild(tr);
    }
  }

  private async applySubsets(): Promise<void> {
    const boxes = this.root.querySelectorAll<HTMLInputElement>(".subsets tbody input");
    const hide: string[] = [];
    const show: string[] = [];
    boxes.forEach((b) => {
      (b.checked ? show : hide).push(b.dataset.caseId!);
    });
    try {
      if (hide.length) await this.client.setVisibility(hide, false);
      if (show.length) await this.client.setVisibility(show, true);
      hide.forEach((id) => this.state.hiddenCases.add(id));
      show.forEach((id) => this.state.hiddenCases.delete(id));
      this.state.serverRevision = this.client.revision;
      await this.refreshScene();
    } catch (e) {
      this.toast(e);
    }
  }

  // ---- scene ----------------------------------------------------------

  async switchView(view: ViewName): Promise<void> {
    this.state = { ...this.state, view };
    await this.refreshScene();
  }

  async refreshScene(): Promise<void> {
    const doc = await this.client.scene(this.state.view);
    this.lastScene = doc;
    this.renderCurrent();
  }

  renderCurrent(): void {
    if (!this.lastScene) return;
    const canvas = this.root.querySelector(".canvas")!;
    let svg: SVGSVGElement;
    try {
      svg = renderScene(this.lastScene, {
        activeCoordinates: this.state.activeCoordinates ?? undefined,
        selectedCase: this.state.selectedCase,
        selectedBlock: this.state.selectedBlock !== null
          ? this.blocks[this.state.selectedBlock] : null,
        showBlockEdges: this.state.showBlockEdges,
        showBlockCenter: this.state.showBlockCenter,
      });
    } catch (e) {
      if (e instanceof SchemaError) {
        this.showBanner(`scene rejected: ${e.message}`);
        return;
      }
      throw e;
    }
    this.hideBanner();
    canvas.innerHTML = "";
    canvas.appendChild(svg);
    this.wireCanvas(svg);
  }

  private wireCanvas(svg: SVGSVGElement): void {
    svg.querySelectorAll<SVGElement>(".case-line").forEach((line) => {
      line.addEventListener("click", () => {
        this.state = { ...this.state, selectedCase: line.dataset.case ?? null };
        this.renderCurrent();
      });
      line.addEventListener("dblclick", () => {
        void this.straighten(line.dataset.case!);
      });
    });
    svg.querySelectorAll<SVGElement>(".axis").forEach((axis) => {
      axis.addEventListener("pointerdown", (ev) => {
        this.beginAxisDrag(axis.dataset.coordinate!, ev as PointerEvent, svg);
      });
    });
  }

  // ---- commands -------------------------------------------------------

  async growBlock(halfLength: number): Promise<void> {
    try {
      const out = await this.client.growBlocks(halfLength);
      this.state.serverRevision = out.revision;
      this.setStatus(`${out.blocks} blocks (${out.pure} pure, ${out.mixed} mixed), `
        + `largest ${out.sizes[0] ?? 0}`);
      this.blocks = await this.client.blocks();
      await this.refreshScene();
    } catch (e) {
      this.toast(e);
    }
  }

  async straighten(caseId: string): Promise<void> {
    try {
      const out = await this.client.straighten(caseId);
      this.state.serverRevision = out.revision;
      await this.refreshScene();
    } catch (e) {
      this.toast(e);
    }
  }

  async undo(): Promise<void> {
    try {
      const out = await this.client.undo();
      this.state.serverRevision = out.revision;
      await this.refreshScene();
    } catch (e) {
      this.toast(e);
    }
  }

  /** Axis drag: optimistic vertical translate per animation frame, one
   * axis-shift command with the accumulated delta on release. */
  beginAxisDrag(coordinate: string, down: PointerEvent, svg: SVGSVGElement): void {
    let lastY = down.clientY;
    let totalPx = 0;
    let framePending = false;
    const group = svg.querySelector<SVGElement>(
      `.axis[data-coordinate="${coordinate}"]`)!;

    const move = (ev: PointerEvent) => {
      totalPx += ev.clientY - lastY;
      lastY = ev.clientY;
      if (!framePending) {
        framePending = true;
        this.schedule(() => {
          framePending = false;
          group.setAttribute("transform", `translate(0 ${totalPx})`);
        });
      }
    };
    const up = async () => {
      document.removeEventListener("pointermove", move as EventListener);
      document.removeEventListener("pointerup", up as EventListener);
      group.removeAttribute("transform");
      const deltaUnits = -totalPx / AXIS_HEIGHT;   // screen down = value down
      if (deltaUnits === 0) return;
      try {
        const out = await this.client.shiftAxis(coordinate, deltaUnits);
        this.state.serverRevision = out.revision;
        await this.refreshScene();
      } catch (e) {
        this.toast(e);
      }
    };
    document.addEventListener("pointermove", move as EventListener);
    document.addEventListener("pointerup", up as EventListener);
  }

  // ---- feedback -------------------------------------------------------

  private setStatus(text: string): void {
    const s = this.root.querySelector(".status");
    if (s) s.textContent = text;
  }

  private showBanner(text: string): void {
    const b = this.root.querySelector<HTMLElement>(".error-banner")!;
    b.textContent = text;
    b.hidden = false;
  }

  private hideBanner(): void {
    const b = this.root.querySelector<HTMLElement>(".error-banner");
    if (b) b.hidden = true;
  }

  private toast(e: unknown): void {
    const text = e instanceof ApiError ? e.detail
      : e instanceof Error ? e.message : String(e);
    this.showBanner(text);
  }
}
