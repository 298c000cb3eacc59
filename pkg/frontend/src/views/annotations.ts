/** Annotations view: the PDF with clickable regions on the left, per-model
 * results for the clicked entity on the right. */

import { Api } from "../api.js";
import { labelBorder, labelColor } from "../colors.js";
import { clear, el, table } from "../dom.js";
import { enclosingBox, hitTest, overlayRect, relativePosition } from "../geometry.js";
import { buildSegments, type TagSpan } from "../highlight.js";
import { resolveTarget } from "../navigation.js";
import type { Store } from "../state.js";
import type {
  AnnotationsPayload,
  AnnotationResultGroup,
  BoxTuple,
  DocumentJson,
  EntityJson,
  EntityRef,
} from "../types.js";

const CLICKABLE_LAYERS = ["paragraphs", "tables"];
const CROP_PAD = 0.01;

export class AnnotationsView {
  private docCache = new Map<string, DocumentJson>();
  private rightPane: HTMLElement = el("div", { class: "annotations-right" });

  constructor(private api: Api, private store: Store) {}

  private async document(docId: string): Promise<DocumentJson> {
    let doc = this.docCache.get(docId);
    if (!doc) {
      doc = await this.api.getDocument(docId);
      this.docCache.set(docId, doc);
    }
    return doc;
  }

  async mount(root: HTMLElement): Promise<void> {
    clear(root);
    const state = this.store.get();
    if (!state.docId) return;
    const doc = await this.document(state.docId);

    const left = el("div", { class: "pdf-pane" });
    for (const page of doc.pages) {
      left.append(this.renderPage(doc, state.docId, page.index));
    }
    this.rightPane = el("div", { class: "annotations-right" },
      el("p", { class: "empty-state" }, "Click a paragraph or table on the left."));
    root.append(
      el("h2", {}, "Annotations"),
      el("div", { class: "annotations-columns" }, left, this.rightPane),
    );

    if (state.selectedEntity) {
      const target = resolveTarget(doc, state.selectedEntity);
      if (CLICKABLE_LAYERS.includes(target.layer)) {
        await this.select(state.docId, target);
      }
    }
  }

  private renderPage(doc: DocumentJson, docId: string, pageIndex: number): HTMLElement {
    const img = el("img", {
      class: "page-image",
      src: this.api.pageImageUrl(docId, pageIndex),
      draggable: "false",
    }) as HTMLImageElement;
    const overlayHost = el("div", { class: "overlay-host" }, img);

    const drawOverlays = () => {
      overlayHost.querySelectorAll(".overlay-box").forEach((n) => n.remove());
      const width = img.clientWidth;
      const height = img.clientHeight;
      if (!width || !height) return;
      for (const layer of CLICKABLE_LAYERS) {
        for (const entity of doc.layers[layer] ?? []) {
          for (const box of entity.boxes) {
            if (box[0] !== pageIndex) continue;
            const rect = overlayRect(box, width, height);
            const div = el("div", { class: `overlay-box region-${layer}` });
            div.style.left = `${rect.left}px`;
            div.style.top = `${rect.top}px`;
            div.style.width = `${rect.width}px`;
            div.style.height = `${rect.height}px`;
            overlayHost.append(div);
          }
        }
      }
    };
    img.addEventListener("load", drawOverlays);

    overlayHost.addEventListener("click", (event) => {
      const bounds = img.getBoundingClientRect();
      const { x, y } = relativePosition(bounds, event.clientX, event.clientY);
      let bestLayer: string | null = null;
      let best: EntityJson | null = null;
      for (const layer of CLICKABLE_LAYERS) {
        const hit = hitTest(doc.layers[layer] ?? [], pageIndex, x, y);
        if (!hit) continue;
        if (!best || smallestArea(hit, pageIndex) < smallestArea(best, pageIndex)) {
          best = hit;
          bestLayer = layer;
        }
      }
      if (best && bestLayer) {
        void this.select(docId, { layer: bestLayer, id: best.id });
      }
      // a margin click keeps the current selection
    });
    return overlayHost;
  }

  private async select(docId: string, ref: EntityRef): Promise<void> {
    this.store.selectEntity(ref);
    const payload = await this.api.getAnnotations(docId, ref.layer, ref.id);
    this.renderResults(docId, payload);
  }

  private renderResults(docId: string, payload: AnnotationsPayload): void {
    clear(this.rightPane);
    const section = String(payload.entity.metadata["section"] ?? "");
    this.rightPane.append(
      el("h3", {}, `${payload.layer} #${payload.entity.id}`,
        section ? el("span", { class: "kind-chip" }, section) : null),
    );
    if (!payload.results.length) {
      this.rightPane.append(
        el("p", { class: "empty-state" }, "No model results for this entity yet."),
        el("pre", { class: "raw" }, payload.text),
      );
      return;
    }
    const tabs = el("div", { class: "tabs" });
    const body = el("div", { class: "tab-body" });
    payload.results.forEach((group, index) => {
      const button = el("button", {
        class: index === 0 ? "tab active" : "tab",
        onclick: (e) => {
          tabs.querySelectorAll(".tab").forEach((t) => t.classList.remove("active"));
          (e.target as HTMLElement).classList.add("active");
          clear(body);
          body.append(this.renderGroup(docId, payload, group));
        },
      }, `${group.predictor} (${group.kind})`);
      tabs.append(button);
    });
    this.rightPane.append(tabs, body);
    body.append(this.renderGroup(docId, payload, payload.results[0]));
  }

  private renderGroup(
    docId: string,
    payload: AnnotationsPayload,
    group: AnnotationResultGroup,
  ): HTMLElement {
    if (group.kind === "tagged") return renderTagged(payload, group);
    if (group.kind === "generated") return renderGenerated(group);
    return this.renderImage(docId, payload, group);
  }

  private renderImage(
    docId: string,
    payload: AnnotationsPayload,
    group: AnnotationResultGroup,
  ): HTMLElement {
    const container = el("div", {});
    if (!group.entities.length) {
      container.append(el("p", { class: "empty-state" }, "no output"));
      return container;
    }
    const region = enclosingBox(payload.entity.boxes);
    for (const entity of group.entities) {
      const crop = el("img", {
        class: "crop-image",
        src: this.api.cropUrl(docId, payload.layer, payload.entity.id, 150, CROP_PAD),
      }) as HTMLImageElement;
      const host = el("div", { class: "overlay-host" }, crop);
      const boxes = (entity.metadata["boxes"] as unknown[] | null) ?? [];
      crop.addEventListener("load", () => {
        if (!region) return;
        const cropRegion = padRegion(region, CROP_PAD);
        for (const raw of boxes) {
          const [page, x, y, w, h, label] = raw as [number, number, number, number, number, string];
          if (page !== cropRegion[0]) continue;
          const rel: BoxTuple = [
            page,
            (x - cropRegion[1]) / cropRegion[3],
            (y - cropRegion[2]) / cropRegion[4],
            w / cropRegion[3],
            h / cropRegion[4],
          ];
          const rect = overlayRect(rel, crop.clientWidth, crop.clientHeight);
          const div = el("div", { class: "overlay-box cell-box", title: label });
          div.style.left = `${rect.left}px`;
          div.style.top = `${rect.top}px`;
          div.style.width = `${rect.width}px`;
          div.style.height = `${rect.height}px`;
          host.append(div);
        }
      });
      container.append(host);
      const record = entity.metadata["table"] as Record<string, unknown[]> | null;
      if (record) {
        const columns = Object.keys(record);
        const height = Math.max(0, ...columns.map((c) => record[c].length));
        const rows: string[][] = [];
        for (let i = 0; i < height; i++) {
          rows.push(columns.map((c) => String(record[c][i] ?? "")));
        }
        container.append(table(columns, rows));
      }
      const rawText = entity.metadata["raw_text"];
      if (typeof rawText === "string" && rawText) {
        container.append(el("pre", { class: "raw" }, rawText));
      }
    }
    return container;
  }
}

function smallestArea(entity: EntityJson, page: number): number {
  const areas = entity.boxes.filter((b) => b[0] === page).map((b) => b[3] * b[4]);
  return areas.length ? Math.min(...areas) : Number.POSITIVE_INFINITY;
}

/** The crop endpoint pads and clamps; mirror it so overlays line up. */
export function padRegion(region: BoxTuple, pad: number): BoxTuple {
  const [page, x, y, w, h] = region;
  const x0 = Math.max(0, x - pad);
  const y0 = Math.max(0, y - pad);
  const x1 = Math.min(1, x + w + pad);
  const y1 = Math.min(1, y + h + pad);
  return [page, x0, y0, x1 - x0, y1 - y0];
}

function renderTagged(payload: AnnotationsPayload, group: AnnotationResultGroup): HTMLElement {
  const container = el("div", {});
  if (!group.entities.length) {
    container.append(el("p", { class: "empty-state" }, "no tags in this entity"));
    return container;
  }
  const base = payload.entity.spans.length ? payload.entity.spans[0][0] : 0;
  const tags: TagSpan[] = group.entities.map((e) => ({
    start: e.spans[0][0] - base,
    end: e.spans[0][1] - base,
    label: String(e.metadata["label"] ?? ""),
    score: Number(e.metadata["score"] ?? 1),
  }));
  const paragraph = el("p", { class: "highlighted-text" });
  for (const segment of buildSegments(payload.text, tags)) {
    if (!segment.covering.length) {
      paragraph.append(segment.text);
      continue;
    }
    // nested rendering: outer span wraps inner
    let node: HTMLElement | null = null;
    for (const tag of segment.covering) {
      const mark = el("mark", { class: "tag-mark", title: `${tag.label} (${tag.score})` });
      mark.style.backgroundColor = labelColor(tag.label);
      mark.style.borderBottom = `2px solid ${labelBorder(tag.label)}`;
      if (node) node.append(mark);
      else paragraph.append(mark);
      node = mark;
    }
    node!.append(segment.text);
    const last = segment.covering[segment.covering.length - 1];
    if (segment.end === last.end) {
      const chipNode = el("span", { class: "label-chip" }, last.label);
      chipNode.style.backgroundColor = labelColor(last.label);
      chipNode.style.borderColor = labelBorder(last.label);
      node!.append(chipNode);
    }
  }
  container.append(paragraph);
  return container;
}

function renderGenerated(group: AnnotationResultGroup): HTMLElement {
  const container = el("div", {});
  if (!group.entities.length) {
    container.append(el("p", { class: "empty-state" }, "no generation for this entity"));
    return container;
  }
  for (const entity of group.entities) {
    const parsed = entity.metadata["parsed"];
    const parseError = entity.metadata["parse_error"];
    container.append(el("pre", { class: "raw" },
      String(entity.metadata["raw_response"] ?? "")));
    if (parsed && typeof parsed === "object" && !Array.isArray(parsed)) {
      const record = parsed as Record<string, unknown>;
      container.append(
        table(["key", "value"],
          Object.entries(record).map(([k, v]) => [k, JSON.stringify(v)])),
      );
    } else if (typeof parseError === "string" && parseError) {
      container.append(el("p", { class: "field-error" }, `parse failed: ${parseError}`));
    }
  }
  return container;
}
