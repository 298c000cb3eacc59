/** Upload view: pick predictors, configure them, upload a PDF, watch stages. */

import { Api, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import type { Store } from "../state.js";
import type {
  ConfigFieldJson,
  JobJson,
  PredictorConfigRecord,
  PredictorDescriptorJson,
} from "../types.js";

interface PredictorInstance {
  descriptor: PredictorDescriptorJson;
  enabled: boolean;
  values: Record<string, string | boolean>;
  card?: HTMLElement;
}

const STAGE_ICON: Record<string, string> = {
  pending: "○",
  running: "◔",
  done: "●",
  failed: "✕",
  skipped: "◎",
};

export function coerceConfig(
  fields: ConfigFieldJson[],
  values: Record<string, string | boolean>,
): Record<string, unknown> {
  const config: Record<string, unknown> = {};
  for (const field of fields) {
    const raw = values[field.name];
    if (raw === undefined || raw === "") continue;
    if (field.type === "int") config[field.name] = parseInt(String(raw), 10);
    else if (field.type === "float") config[field.name] = parseFloat(String(raw));
    else if (field.type === "bool") config[field.name] = Boolean(raw);
    else config[field.name] = String(raw);
  }
  return config;
}

export function collectConfigs(instances: PredictorInstance[]): PredictorConfigRecord[] {
  return instances
    .filter((inst) => inst.enabled)
    .map((inst) => ({
      name: inst.descriptor.name,
      config: coerceConfig(inst.descriptor.config_schema, inst.values),
    }));
}

export class UploadView {
  private instances: PredictorInstance[] = [];
  private descriptors: PredictorDescriptorJson[] = [];
  private progress: HTMLElement = el("div", { class: "progress" });
  private errorBox: HTMLElement = el("div", { class: "error-box" });
  private polling: number | null = null;

  constructor(private api: Api, private store: Store) {}

  async mount(root: HTMLElement): Promise<void> {
    clear(root);
    if (!this.descriptors.length) {
      this.descriptors = await this.api.listPredictors();
      this.instances = this.descriptors.map((d) => ({
        descriptor: d,
        enabled: false,
        values: defaultValues(d),
      }));
    }
    const cards = el("div", { class: "predictor-cards" });
    for (const inst of this.instances) cards.append(this.renderCard(inst, cards));
    const fileInput = el("input", { type: "file", accept: ".pdf" }) as HTMLInputElement;
    const dropZone = el(
      "div",
      {
        class: "drop-zone",
        ondragover: (e) => e.preventDefault(),
        ondrop: (e) => {
          e.preventDefault();
          const file = (e as DragEvent).dataTransfer?.files?.[0];
          if (file) void this.process(file);
        },
      },
      el("p", {}, "Drop a PDF here, or choose a file. Basic parsing always runs; toggled predictors run after it."),
      fileInput,
      el("button", {
        class: "primary",
        onclick: () => {
          const file = fileInput.files?.[0];
          if (file) void this.process(file);
        },
      }, "Upload and process"),
    );
    root.append(
      el("h2", {}, "Upload and process"),
      el("div", { class: "upload-columns" },
        el("section", {}, el("h3", {}, "Models"), cards),
        el("section", {}, el("h3", {}, "File"), dropZone, this.errorBox, this.progress),
      ),
    );
  }

  private renderCard(inst: PredictorInstance, cardsRoot: HTMLElement): HTMLElement {
    const fields = el("div", { class: "config-fields" });
    for (const field of inst.descriptor.config_schema) {
      fields.append(this.renderField(inst, field));
    }
    const toggle = el("input", {
      type: "checkbox",
      onchange: (e) => {
        inst.enabled = (e.target as HTMLInputElement).checked;
        card.classList.toggle("enabled", inst.enabled);
      },
    }) as HTMLInputElement;
    const header = el(
      "label", { class: "card-header" },
      toggle,
      el("strong", {}, inst.descriptor.name),
      el("span", { class: "kind-chip" }, inst.descriptor.kind.replace("_", " ")),
    );
    const children: (HTMLElement | null)[] = [
      header,
      el("p", { class: "hint" }, inst.descriptor.description),
      fields,
    ];
    if (inst.descriptor.kind === "text_generation") {
      children.push(
        el("button", {
          class: "ghost",
          onclick: () => {
            const copy: PredictorInstance = {
              descriptor: inst.descriptor,
              enabled: true,
              values: { ...inst.values },
            };
            this.instances.push(copy);
            cardsRoot.insertBefore(this.renderCard(copy, cardsRoot), null);
            const added = this.instances[this.instances.length - 1];
            added.card?.classList.add("enabled");
            const box = added.card?.querySelector("input[type=checkbox]");
            if (box) (box as HTMLInputElement).checked = true;
          },
        }, "+ add another with a different prompt"),
      );
    }
    const card = el("div", { class: "predictor-card" }, ...children);
    inst.card = card;
    return card;
  }

  private renderField(inst: PredictorInstance, field: ConfigFieldJson): HTMLElement {
    const id = `f-${Math.random().toString(36).slice(2)}`;
    const isPrompt = field.name.includes("prompt");
    let input: HTMLElement;
    if (field.type === "bool") {
      input = el("input", {
        type: "checkbox", id,
        onchange: (e) => { inst.values[field.name] = (e.target as HTMLInputElement).checked; },
      });
    } else if (isPrompt) {
      const area = el("textarea", {
        id, rows: "3",
        oninput: (e) => { inst.values[field.name] = (e.target as HTMLTextAreaElement).value; },
      }) as HTMLTextAreaElement;
      area.value = String(inst.values[field.name] ?? "");
      input = area;
    } else {
      const box = el("input", {
        id,
        type: field.secret ? "password" : "text",
        placeholder: field.secret ? "NAME_OF_ENV_VAR_WITH_KEY" : String(field.default ?? ""),
        oninput: (e) => { inst.values[field.name] = (e.target as HTMLInputElement).value; },
      }) as HTMLInputElement;
      box.value = String(inst.values[field.name] ?? "");
      input = box;
    }
    return el(
      "div", { class: "field", "data-field": field.name },
      el("label", { for: id }, field.name + (field.required ? " *" : "")),
      input,
      el("div", { class: "field-error", "data-error-for": field.name }),
      field.description ? el("div", { class: "hint" }, field.description) : null,
    );
  }

  private showFieldErrors(fields: Record<string, string>): void {
    for (const [name, message] of Object.entries(fields)) {
      document
        .querySelectorAll(`[data-error-for="${name}"]`)
        .forEach((node) => { node.textContent = message; });
    }
  }

  private async process(file: File): Promise<void> {
    clear(this.errorBox);
    document.querySelectorAll(".field-error").forEach((n) => { n.textContent = ""; });
    try {
      const docId = await this.api.uploadPdf(file, file.name);
      const jobId = await this.api.startJob(docId, collectConfigs(this.instances));
      this.store.setDocument(docId);
      this.poll(jobId);
    } catch (err) {
      if (err instanceof ApiError) {
        this.errorBox.textContent = err.message;
        if (Object.keys(err.fields).length) this.showFieldErrors(err.fields);
      } else {
        this.errorBox.textContent = String(err);
      }
    }
  }

  private poll(jobId: string): void {
    if (this.polling !== null) window.clearInterval(this.polling);
    const tick = async () => {
      const job = await this.api.getJob(jobId);
      this.renderProgress(job);
      if (job.finished_at !== null && this.polling !== null) {
        window.clearInterval(this.polling);
        this.polling = null;
      }
    };
    this.polling = window.setInterval(() => void tick(), 1000);
    void tick();
  }

  private renderProgress(job: JobJson): void {
    clear(this.progress);
    const list = el("ul", { class: "stages" });
    for (const stage of job.stages) {
      list.append(
        el("li", { class: `stage-${stage.state}` },
          el("span", { class: "stage-icon" }, STAGE_ICON[stage.state] ?? "?"),
          ` ${stage.name}: ${stage.state}`,
          stage.error ? el("span", { class: "stage-error" }, ` (${stage.error})`) : null,
        ),
      );
    }
    const finished = job.finished_at !== null;
    this.progress.append(
      el("h4", {}, finished ? "Processing complete" : "Processing…"),
      list,
    );
    if (finished) {
      this.progress.append(
        el("button", {
          class: "primary",
          onclick: () => { this.store.setView("summary"); },
        }, "Open summary"),
      );
    }
  }
}

function defaultValues(descriptor: PredictorDescriptorJson): Record<string, string | boolean> {
  const values: Record<string, string | boolean> = {};
  for (const field of descriptor.config_schema) {
    if (field.default !== null && field.default !== undefined) {
      values[field.name] = field.type === "bool" ? Boolean(field.default) : String(field.default);
    }
  }
  return values;
}
