/** Client view state with a minimal subscription mechanism. */

import type { EntityRef } from "./types.js";

export type ViewName = "upload" | "summary" | "annotations" | "inspection";

export interface ViewState {
  view: ViewName;
  docId: string | null;
  section: string | null;
  selectedLayer: string | null;
  selectedEntity: EntityRef | null;
}

export type Listener = (state: ViewState) => void;

const DOC_VIEWS: ViewName[] = ["summary", "annotations", "inspection"];

export class Store {
  private state: ViewState = {
    view: "upload",
    docId: null,
    section: null,
    selectedLayer: null,
    selectedEntity: null,
  };
  private listeners: Listener[] = [];

  get(): ViewState {
    return { ...this.state };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  /** Document-scoped views need a processed document selected. */
  setView(view: ViewName): boolean {
    if (DOC_VIEWS.includes(view) && this.state.docId === null) return false;
    this.update({ view });
    return true;
  }

  setDocument(docId: string): void {
    this.update({ docId, section: null, selectedLayer: null, selectedEntity: null });
  }

  setSection(section: string | null): void {
    this.update({ section });
  }

  selectEntity(entity: EntityRef | null, view?: ViewName): void {
    const patch: Partial<ViewState> = { selectedEntity: entity };
    if (view) patch.view = view;
    this.update(patch);
  }

  selectLayer(layer: string | null): void {
    this.update({ selectedLayer: layer, selectedEntity: null });
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.get());
  }
}
