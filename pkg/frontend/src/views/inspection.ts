/** Inspection view: any layer's entities over the PDF, with the selected
 * entity's crop and text (sentence boundaries toggleable). */

import { Api } from "../api.js";
import { clear, el } from "../dom.js";
import { hitTest, overlayRect, relativePosition } from "../geometry.js";
import { sentenceBoundaries } from "../highlight.js";
import type { Store } from "../state.js";
import type { DocumentJson, EntityJson } from "../types.js";

export class InspectionView {
  private docCache = new Map<string, DocumentJson>();
  private showSentences = false;
  private detail: HTMLElement = el("div", {});

  constructor(private api: Api, private store: Store) {}

  async mount(root: HTMLElement): Promise<void> {
    clear(root);
    const state = this.store.get();
    if (!state.docId) return;
    let doc = this.docCache.get(state.docId);
    if (!doc) {
      doc = await this.api.getDocument(state.docId);
      this.docCache.set(state.docId, doc);
    }
    const layers = Object.keys(doc.layers).sort();
    const activeLayer = state.selectedLayer && layers.includes(state.selectedLayer)
      ? state.selectedLayer
      : "blocks";

    const sidebar = el("div", { class: "layer-sidebar" }, el("h3", {}, "Layers"));
    for (const name of layers) {
      sidebar.append(
        el("button", {
          class: name === activeLayer ? "layer-item active" : "layer-item",
          onclick: () => { this.store.selectLayer(name); },
        }, `${name} (${doc!.layers[name].length})`),
      );
    }

    const entities = doc.layers[activeLayer] ?? [];
    const pdfPane = el("div", { class: "pdf-pane" });
    for (const page of doc.pages) {
      pdfPane.append(this.renderPage(doc, state.docId, page.index, activeLayer, entities));
    }
    const boxless = entities.filter((e) => !e.boxes.length);
    if (boxless.length) {
      const list = el("ul", {});
      for (const entity of boxless) {
        list.append(el("li", {},
          el("a", {
            href: "#", onclick: (e) => {
              e.preventDefault();
              this.renderDetail(doc!, state.docId!, activeLayer, entity);
            },
          }, `entity ${entity.id} (no boxes)`)));
      }
      pdfPane.append(el("h4", {}, "Entities without boxes"), list);
    }

    this.detail = el("div", { class: "inspection-detail" },
      el("p", { class: "empty-state" }, "Select an entity on the PDF."));
    root.append(
      el("h2", {}, "Representation inspection"),
      el("div", { class: "inspection-columns" }, sidebar, pdfPane, this.detail),
    );

    const selected = state.selectedEntity;
    if (selected && selected.layer === activeLayer) {
      const entity = entities.find((e) => e.id === selected.id);
      if (entity) this.renderDetail(doc, state.docId, activeLayer, entity);
    }
  }

  private renderPage(
    doc: DocumentJson,
    docId: string,
    pageIndex: number,
    layerName: string,
    entities: EntityJson[],
  ): HTMLElement {
    const img = el("img", {
      class: "page-image",
      src: this.api.pageImageUrl(docId, pageIndex),
      draggable: "false",
    }) as HTMLImageElement;
    const host = el("div", { class: "overlay-host" }, img);
    img.addEventListener("load", () => {
      const width = img.clientWidth;
      const height = img.clientHeight;
      for (const entity of entities) {
        for (const box of entity.boxes) {
          if (box[0] !== pageIndex) continue;
          const rect = overlayRect(box, width, height);
          const div = el("div", { class: "overlay-box region-inspect" });
          div.style.left = `${rect.left}px`;
          div.style.top = `${rect.top}px`;
          div.style.width = `${rect.width}px`;
          div.style.height = `${rect.height}px`;
          host.append(div);
        }
      }
    });
    host.addEventListener("click", (event) => {
      const bounds = img.getBoundingClientRect();
      const { x, y } = relativePosition(bounds, event.clientX, event.clientY);
      const hit = hitTest(entities, pageIndex, x, y);
      if (hit) this.renderDetail(doc, docId, layerName, hit);
    });
    return host;
  }

  private renderDetail(
    doc: DocumentJson,
    docId: string,
    layerName: string,
    entity: EntityJson,
  ): void {
    this.store.selectEntity({ layer: layerName, id: entity.id });
    clear(this.detail);
    const children: (Node | string | null)[] = [
      el("h3", {}, `${layerName} #${entity.id}`),
    ];
    if (entity.boxes.length) {
      children.push(el("img", {
        class: "crop-image",
        src: this.api.cropUrl(docId, layerName, entity.id),
      }));
    }
    const text = entityText(doc, entity);
    if (!text) {
      children.push(el("p", { class: "empty-state" }, "image-only entity: no extracted text"));
    } else {
      const toggle = el("label", { class: "toggle" },
        (() => {
          const box = el("input", { type: "checkbox" }) as HTMLInputElement;
          box.checked = this.showSentences;
          box.addEventListener("change", () => {
            this.showSentences = box.checked;
            this.renderDetail(doc, docId, layerName, entity);
          });
          return box;
        })(),
        " show sentence boundaries",
      );
      children.push(toggle, this.renderText(doc, entity, text));
    }
    const meta = JSON.stringify(entity.metadata, null, 2);
    if (meta !== "{}") {
      children.push(el("h4", {}, "Metadata"), el("pre", { class: "raw" }, meta));
    }
    this.detail.append(...children.filter((c): c is Node | string => c != null));
  }

  private renderText(doc: DocumentJson, entity: EntityJson, text: string): HTMLElement {
    const pre = el("pre", { class: "entity-text" });
    if (!this.showSentences || !entity.spans.length || !doc.layers["sentences"]) {
      pre.append(text);
      return pre;
    }
    const spans = doc.layers["sentences"].flatMap((s) => s.spans);
    const marks = sentenceBoundaries(entity.spans[0][0], entity.spans[entity.spans.length - 1][1], spans);
    let cursor = 0;
    for (const mark of marks) {
      pre.append(text.slice(cursor, mark));
      pre.append(el("span", { class: "sentence-mark", title: "sentence boundary" }, "⏐"));
      cursor = mark;
    }
    pre.append(text.slice(cursor));
    return pre;
  }
}

/** Client-side text recovery: span slices joined with single spaces. */
export function entityText(doc: DocumentJson, entity: EntityJson): string {
  return entity.spans.map(([s, e]) => doc.symbols.slice(s, e)).join(" ");
}
