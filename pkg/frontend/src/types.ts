// Payload shapes of the JSON HTTP API (see ../docs/api.md).

export type Bbox = [number, number, number, number]; // x0, y0, x1, y1

export interface RelationColumn {
  name: string;
  type: "text" | "integer";
}

export interface RelationPayload {
  name: string;
  columns: RelationColumn[];
  rows: (string | number)[][];
}

export interface WordPayload {
  word_id: number;
  text: string;
  bbox: Bbox;
  confidence: number;
}

export interface LinePayload {
  line_id: number;
  text: string;
  bbox: Bbox;
  block_id: number;
  box_id: number;
  word_ids: number[];
}

export interface BlockPayload {
  block_id: number;
  bbox: Bbox;
  line_ids: number[];
}

export interface BoxPayload {
  box_id: number;
  bbox: Bbox;
}

export interface EntitiesPayload {
  doc_id: string;
  page_size: [number, number];
  words: WordPayload[];
  lines: LinePayload[];
  blocks: BlockPayload[];
  boxes: BoxPayload[];
}

export interface IngestResult {
  doc_id: string;
  counts: { words: number; lines: number; blocks: number; boxes: number };
}

export interface SessionInfo {
  session_id: string;
  doc_id: string;
  template_id: string;
}

export interface QueryResponse {
  kind: "result" | "ack" | "error";
  message: string;
  sql: string | null;
  relation: RelationPayload | null;
  highlight_word_ids: number[];
}

export interface WorkflowInfo {
  name: string;
  steps: number;
  template_id: string;
}

export interface ApplyStep {
  sql: string;
  empty: boolean;
  error: string | null;
  relation: RelationPayload | null;
}

export interface ApplyResult {
  workflow: string;
  template_warning: string | null;
  steps: ApplyStep[];
}

export interface TemplateMatch {
  template_id: string;
  score: number;
}
