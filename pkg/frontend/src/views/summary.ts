/** Summary view: extracted content at a glance, filterable by section. */

import { Api } from "../api.js";
import { labelBorder, labelColor } from "../colors.js";
import { clear, el, table } from "../dom.js";
import type { Store } from "../state.js";
import type { EntityRef, SummaryPayload } from "../types.js";

export class SummaryView {
  constructor(private api: Api, private store: Store) {}

  async mount(root: HTMLElement): Promise<void> {
    clear(root);
    const state = this.store.get();
    if (!state.docId) return;
    let summary: SummaryPayload;
    try {
      summary = await this.api.getSummary(state.docId, state.section);
    } catch (err: unknown) {
      root.append(el("p", { class: "empty-state" },
        "Document is still processing; try again shortly."));
      return;
    }
    const sectionSelect = el("select", {
      onchange: (e) => {
        const value = (e.target as HTMLSelectElement).value;
        this.store.setSection(value || null);
      },
    }) as HTMLSelectElement;
    sectionSelect.append(el("option", { value: "" }, "all sections"));
    for (const name of summary.sections) {
      const option = el("option", { value: name }, name) as HTMLOptionElement;
      if (state.section === name) option.selected = true;
      sectionSelect.append(option);
    }

    const left = el("div", { class: "summary-left" });
    left.append(el("h3", {}, "Tagged and generated content"));
    if (!summary.tagging.length && !summary.generation.length) {
      left.append(el("p", { class: "empty-state" }, "No text predictors were run."));
    }
    for (const layer of summary.tagging) {
      left.append(el("h4", {}, layer.layer));
      if (!layer.rows.length) {
        left.append(el("p", { class: "empty-state" }, "no rows"));
        continue;
      }
      left.append(
        table(
          ["text", "label", "score", "section"],
          layer.rows.map((row) => [
            this.entityLink(row.text, row.entity),
            chip(row.label),
            row.score.toFixed(2),
            row.section,
          ]),
        ),
      );
    }
    for (const layer of summary.generation) {
      left.append(el("h4", {}, layer.layer));
      const columns = ["section", ...layer.columns];
      left.append(
        table(
          columns,
          layer.rows.map((row) => [
            this.entityLink(row.section || "(none)", row.entity),
            ...layer.columns.map((c) => formatCell(row.values[c])),
          ]),
        ),
      );
    }

    const right = el("div", { class: "summary-right" });
    right.append(el("h3", {}, "Image and table content"));
    const entries = summary.images.flatMap((layerEntry) =>
      layerEntry.entries.map((entry) => ({ layer: layerEntry.layer, entry })));
    if (!entries.length) {
      right.append(el("p", { class: "empty-state" }, "No image predictors were run, or no regions were found."));
    }
    for (const { layer, entry } of entries) {
      const cardChildren: (Node | string | null)[] = [
        el("h4", {}, this.entityLink(`${layer} → entity ${entry.entity.id}`, entry.entity)),
        entry.caption ? el("p", { class: "caption" }, entry.caption) : null,
      ];
      if (entry.table) {
        const columns = Object.keys(entry.table);
        const height = Math.max(0, ...columns.map((c) => entry.table![c].length));
        const rows: string[][] = [];
        for (let i = 0; i < height; i++) {
          rows.push(columns.map((c) => String(entry.table![c][i] ?? "")));
        }
        cardChildren.push(table(columns, rows));
      }
      if (entry.raw_text) cardChildren.push(el("pre", { class: "raw" }, entry.raw_text));
      cardChildren.push(el("p", { class: "hint" }, `${entry.box_count} predicted boxes`));
      right.append(el("div", { class: "image-card" }, ...cardChildren));
    }

    root.append(
      el("h2", {}, "Summary"),
      el("div", { class: "toolbar" }, el("label", {}, "Filter by section: "), sectionSelect),
      el("div", { class: "summary-columns" }, left, right),
    );
  }

  /** Clicking a row opens the annotations view; result-layer refs resolve
   * to their containing paragraph/table there. */
  private entityLink(text: string, ref: EntityRef): HTMLElement {
    return el("a", {
      href: "#",
      onclick: (e) => {
        e.preventDefault();
        this.store.selectEntity(ref, "annotations");
      },
    }, text);
  }
}

function chip(label: string): HTMLElement {
  const node = el("span", { class: "label-chip" }, label);
  node.style.backgroundColor = labelColor(label);
  node.style.borderColor = labelBorder(label);
  return node;
}

function formatCell(value: unknown): string {
  if (value === null || value === undefined || value === "") return "";
  if (typeof value === "object") return JSON.stringify(value);
  return String(value);
}
