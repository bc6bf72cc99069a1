// Typed client over the engine's HTTP API. The workbench never computes
// extraction results itself; every displayed value originates here.

import type {
  ApplyResult,
  EntitiesPayload,
  IngestResult,
  QueryResponse,
  RelationPayload,
  SessionInfo,
  TemplateMatch,
  WorkflowInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly stage: string,
    message: string,
    readonly status: number,
  ) {
    super(`${stage}: ${message}`);
  }
}

interface Envelope<T> {
  ok: boolean;
  data?: T;
  error?: { stage: string; message: string };
}

export class WorkbenchApi {
  constructor(readonly baseUrl: string) {}

  private async unwrap<T>(response: Response): Promise<T> {
    const body = (await response.json()) as Envelope<T>;
    if (!body.ok || body.data === undefined) {
      const err = body.error ?? { stage: "http", message: `status ${response.status}` };
      throw new ApiError(err.stage, err.message, response.status);
    }
    return body.data;
  }

  private async getJson<T>(path: string): Promise<T> {
    return this.unwrap<T>(await fetch(`${this.baseUrl}${path}`));
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap<T>(response);
  }

  async ingestDocument(
    fileName: string,
    ocrPayload: BlobPart,
    format: "tsv" | "hocr" | "jsonwords" = "jsonwords",
    docId?: string,
    image?: BlobPart,
  ): Promise<IngestResult> {
    const form = new FormData();
    form.append("ocr", new Blob([ocrPayload]), fileName);
    form.append("format", format);
    if (docId) form.append("doc_id", docId);
    if (image) form.append("image", new Blob([image]), "page.png");
    const response = await fetch(`${this.baseUrl}/documents`, {
      method: "POST",
      body: form,
    });
    return this.unwrap<IngestResult>(response);
  }

  entities(docId: string): Promise<EntitiesPayload> {
    return this.getJson(`/documents/${docId}/entities`);
  }

  table(docId: string, name: string): Promise<RelationPayload> {
    return this.getJson(`/documents/${docId}/tables/${name}`);
  }

  createSession(docId: string): Promise<SessionInfo> {
    return this.postJson("/sessions", { doc_id: docId });
  }

  utterance(sessionId: string, text: string): Promise<QueryResponse> {
    return this.postJson(`/sessions/${sessionId}/utterance`, { text });
  }

  sql(sessionId: string, text: string): Promise<QueryResponse> {
    return this.postJson(`/sessions/${sessionId}/sql`, { text });
  }

  saveWorkflow(sessionId: string, name: string): Promise<WorkflowInfo> {
    return this.postJson("/workflows", { session_id: sessionId, name });
  }

  async workflows(): Promise<WorkflowInfo[]> {
    const data = await this.getJson<{ workflows: WorkflowInfo[] }>("/workflows");
    return data.workflows;
  }

  applyWorkflow(name: string, docId: string): Promise<ApplyResult> {
    return this.postJson(`/workflows/${name}/apply`, { doc_id: docId });
  }

  registerTemplate(docId: string, name: string): Promise<{ signature_id: string }> {
    return this.postJson("/templates", { doc_id: docId, name });
  }

  templateMatch(docId: string): Promise<TemplateMatch> {
    return this.getJson(`/documents/${docId}/template-match`);
  }
}
