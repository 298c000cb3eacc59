/** Wire types for the document schema (1.0) and service payloads. */

export type SpanTuple = [number, number];
/** [page, x, y, w, h] with x/y/w/h normalized to page size, origin top-left. */
export type BoxTuple = [number, number, number, number, number];

export interface EntityJson {
  id: number;
  spans: SpanTuple[];
  boxes: BoxTuple[];
  metadata: Record<string, unknown>;
}

export interface PageInfoJson {
  index: number;
  width_pts: number;
  height_pts: number;
}

export interface DocumentJson {
  schema_version: string;
  doc_id: string;
  symbols: string;
  pages: PageInfoJson[];
  layers: Record<string, EntityJson[]>;
  metadata: Record<string, unknown>;
}

export interface ConfigFieldJson {
  name: string;
  type: "string" | "int" | "float" | "bool";
  required: boolean;
  secret: boolean;
  default: unknown;
  description: string;
}

export interface PredictorDescriptorJson {
  name: string;
  kind: "token_classification" | "text_generation" | "image";
  description: string;
  concurrent_safe: boolean;
  config_schema: ConfigFieldJson[];
}

export interface PredictorConfigRecord {
  name: string;
  config: Record<string, unknown>;
}

export interface JobStageJson {
  name: string;
  state: "pending" | "running" | "done" | "failed" | "skipped";
  error: string | null;
}

export interface JobJson {
  job_id: string;
  doc_id: string;
  stages: JobStageJson[];
  created_at: number;
  finished_at: number | null;
}

export interface EntityRef {
  layer: string;
  id: number;
}

export interface TagRow {
  text: string;
  label: string;
  score: number;
  section: string;
  entity: EntityRef;
}

export interface GenerationRow {
  section: string;
  values: Record<string, unknown>;
  parse_error: string | null;
  entity: EntityRef;
}

export interface ImageEntry {
  raw_text: string | null;
  table: Record<string, unknown[]> | null;
  box_count: number;
  caption: string | null;
  section: string;
  entity: EntityRef;
}

export interface SummaryPayload {
  doc_id: string;
  sections: string[];
  tagging: { layer: string; rows: TagRow[] }[];
  generation: { layer: string; columns: string[]; rows: GenerationRow[] }[];
  images: { layer: string; entries: ImageEntry[] }[];
}

export interface AnnotationResultGroup {
  layer: string;
  kind: "tagged" | "generated" | "image";
  predictor: string;
  entities: EntityJson[];
}

export interface AnnotationsPayload {
  entity: EntityJson;
  layer: string;
  text: string;
  sentences: SpanTuple[];
  results: AnnotationResultGroup[];
}

export interface ApiErrorPayload {
  error: { code: string; message: string; fields?: Record<string, string> };
}
