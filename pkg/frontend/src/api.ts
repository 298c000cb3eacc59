/** Typed client for the workbench HTTP API. */

import type {
  AnnotationsPayload,
  ApiErrorPayload,
  DocumentJson,
  EntityJson,
  JobJson,
  PredictorConfigRecord,
  PredictorDescriptorJson,
  SummaryPayload,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;
  fields: Record<string, string>;

  constructor(status: number, code: string, message: string, fields?: Record<string, string>) {
    super(message);
    this.status = status;
    this.code = code;
    this.fields = fields ?? {};
  }
}

export class Api {
  constructor(public baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let payload: ApiErrorPayload | null = null;
      try {
        payload = (await response.json()) as ApiErrorPayload;
      } catch {
        // non-JSON error body
      }
      const error = payload?.error;
      throw new ApiError(
        response.status,
        error?.code ?? "http_error",
        error?.message ?? `HTTP ${response.status}`,
        error?.fields,
      );
    }
    return (await response.json()) as T;
  }

  listPredictors(): Promise<PredictorDescriptorJson[]> {
    return this.request("/predictors");
  }

  async uploadPdf(file: Blob, filename: string): Promise<string> {
    const form = new FormData();
    form.append("file", file, filename);
    const payload = await this.request<{ doc_id: string }>("/documents", {
      method: "POST",
      body: form,
    });
    return payload.doc_id;
  }

  async startJob(
    docId: string,
    predictors: PredictorConfigRecord[],
    pipelineConfig?: Record<string, unknown>,
  ): Promise<string> {
    const body: Record<string, unknown> = { predictors };
    if (pipelineConfig) body.pipeline_config = pipelineConfig;
    const payload = await this.request<{ job_id: string }>(
      `/documents/${docId}/process`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    return payload.job_id;
  }

  getJob(jobId: string): Promise<JobJson> {
    return this.request(`/jobs/${jobId}`);
  }

  getDocument(docId: string): Promise<DocumentJson> {
    return this.request(`/documents/${docId}`);
  }

  listLayers(docId: string): Promise<string[]> {
    return this.request<{ layers: string[] }>(`/documents/${docId}/layers`).then(
      (p) => p.layers,
    );
  }

  getLayer(docId: string, layer: string): Promise<EntityJson[]> {
    return this.request<{ layer: string; entities: EntityJson[] }>(
      `/documents/${docId}/layers/${layer}`,
    ).then((p) => p.entities);
  }

  getSummary(docId: string, section?: string | null): Promise<SummaryPayload> {
    const query = section ? `?section=${encodeURIComponent(section)}` : "";
    return this.request(`/documents/${docId}/summary${query}`);
  }

  getAnnotations(docId: string, layer: string, entityId: number): Promise<AnnotationsPayload> {
    return this.request(`/documents/${docId}/entities/${layer}/${entityId}/annotations`);
  }

  pageImageUrl(docId: string, page: number, dpi = 150): string {
    return `${this.baseUrl}/documents/${docId}/pages/${page}/image?dpi=${dpi}`;
  }

  cropUrl(docId: string, layer: string, entityId: number, dpi = 150, pad = 0.01): string {
    return `${this.baseUrl}/documents/${docId}/entities/${layer}/${entityId}/crop?dpi=${dpi}&pad=${pad}`;
  }
}
