// Client view state. Everything here is display-side; anything that changes
// data on the server goes through SessionClient and comes back as a new
// revision plus a refetched scene.

import { ViewName } from "./api.js";

export interface ViewState {
  view: ViewName;
  selectedCase: string | null;
  selectedBlock: number | null;
  activeCoordinates: Set<string> | null;   // null = all
  hiddenCases: Set<string>;
  showBlockEdges: boolean;
  showBlockCenter: boolean;
  serverRevision: number;
  pendingDrag: { coordinate: string; deltaUnits: number } | null;
}

export function initialState(): ViewState {
  return {
    view: "polylines",
    selectedCase: null,
    selectedBlock: null,
    activeCoordinates: null,
    hiddenCases: new Set(),
    showBlockEdges: true,
    showBlockCenter: true,
    serverRevision: 0,
    pendingDrag: null,
  };
}

export function toggleCoordinate(state: ViewState, all: string[], name: string): ViewState {
  const active = new Set(state.activeCoordinates ?? all);
  if (active.has(name)) {
    active.delete(name);
  } else {
    active.add(name);
  }
  return { ...state, activeCoordinates: active };
}

export function setOnlyCoordinates(state: ViewState, names: string[]): ViewState {
  return { ...state, activeCoordinates: new Set(names) };
}

export function isStale(state: ViewState, serverRevision: number): boolean {
  return state.serverRevision !== serverRevision;
}
