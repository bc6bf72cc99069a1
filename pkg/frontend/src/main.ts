// Browser entry point: wires the API client and view state to the DOM.

import { ApiError, WorkbenchApi } from "./api.js";
import { inspectWord } from "./inspector.js";
import { OVERLAY_COLORS, drawPage, wordAt } from "./overlay.js";
import {
  OverlayKind,
  ViewState,
  documentLoaded,
  errorEntry,
  initialState,
  previousResultHint,
  queryFinished,
  recordingCleared,
  toggleOverlay,
  wordSelected,
  workflowsLoaded,
} from "./state.js";

const SCALE = 1.4;

const api = new WorkbenchApi("");
let state: ViewState = initialState();
const knownDocs: string[] = [];

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function setState(next: ViewState): void {
  state = next;
  render();
}

function render(): void {
  const canvas = $("page") as unknown as HTMLCanvasElement;
  if (state.entities) {
    const [pw, ph] = state.entities.page_size;
    canvas.width = pw * SCALE;
    canvas.height = ph * SCALE;
    const ctx = canvas.getContext("2d");
    if (ctx) drawPage(ctx, state, SCALE);
  }
  $("doc-label").textContent = state.docId ?? "no document loaded";

  const transcript = $("transcript");
  transcript.innerHTML = "";
  for (const entry of state.transcript) {
    const item = document.createElement("div");
    item.className = `entry ${entry.kind}`;
    const header = document.createElement("div");
    header.className = "entry-input";
    header.textContent = `${entry.mode === "sql" ? "sql" : ">"} ${entry.input}`;
    item.appendChild(header);
    if (entry.kind === "error") {
      const err = document.createElement("div");
      err.className = "entry-error";
      err.textContent = entry.message;
      item.appendChild(err);
    } else {
      if (entry.sql) {
        const sql = document.createElement("details");
        const summary = document.createElement("summary");
        summary.textContent = "compiled SQL";
        sql.appendChild(summary);
        const code = document.createElement("code");
        code.textContent = entry.sql;
        sql.appendChild(code);
        item.appendChild(sql);
      }
      item.appendChild(renderTable(entry.columns, entry.rows, entry.message));
    }
    transcript.appendChild(item);
  }
  transcript.scrollTop = transcript.scrollHeight;

  const hint = previousResultHint(state);
  $("temp-hint").textContent = hint ?? "";

  const steps = $("recorded-steps");
  steps.innerHTML = "";
  state.recordedSteps.forEach((step, i) => {
    const li = document.createElement("li");
    li.textContent = `${i + 1}. ${step}`;
    steps.appendChild(li);
  });

  const list = $("workflow-list");
  list.innerHTML = "";
  for (const wf of state.workflows) {
    const li = document.createElement("li");
    li.textContent = `${wf.name} (${wf.steps} steps)`;
    const apply = document.createElement("button");
    apply.textContent = "apply to current doc";
    apply.onclick = () => void applyWorkflow(wf.name);
    li.appendChild(apply);
    list.appendChild(li);
  }

  const picker = $("apply-doc") as unknown as HTMLSelectElement;
  picker.innerHTML = "";
  for (const docId of knownDocs) {
    const option = document.createElement("option");
    option.value = docId;
    option.textContent = docId;
    picker.appendChild(option);
  }
}

function renderTable(
  columns: string[],
  rows: (string | number)[][],
  caption: string,
): HTMLElement {
  const wrap = document.createElement("div");
  if (rows.length === 0) {
    wrap.textContent = caption || "(no rows)";
    return wrap;
  }
  const table = document.createElement("table");
  const head = table.insertRow();
  for (const column of columns) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  for (const row of rows) {
    const tr = table.insertRow();
    for (const cell of row) {
      tr.insertCell().textContent = String(cell);
    }
  }
  wrap.appendChild(table);
  return wrap;
}

async function loadDocument(file: File): Promise<void> {
  const payload = new Uint8Array(await file.arrayBuffer());
  const format = file.name.endsWith(".tsv")
    ? "tsv"
    : file.name.endsWith(".hocr") || file.name.endsWith(".html")
      ? "hocr"
      : "jsonwords";
  try {
    const ingest = await api.ingestDocument(file.name, payload, format);
    const [session, entities] = await Promise.all([
      api.createSession(ingest.doc_id),
      api.entities(ingest.doc_id),
    ]);
    if (!knownDocs.includes(ingest.doc_id)) knownDocs.push(ingest.doc_id);
    setState(documentLoaded(state, ingest.doc_id, session.session_id, entities));
  } catch (err) {
    reportError("ingest", err);
  }
}

async function runQuery(): Promise<void> {
  const input = $("query-input") as unknown as HTMLInputElement;
  const text = input.value.trim();
  if (!text || !state.sessionId) return;
  const sqlMode = ($("sql-mode") as unknown as HTMLInputElement).checked;
  try {
    const response = sqlMode
      ? await api.sql(state.sessionId, text)
      : await api.utterance(state.sessionId, text);
    setState(queryFinished(state, text, sqlMode ? "sql" : "nl", response));
    await refreshWorkflows();
  } catch (err) {
    if (err instanceof ApiError) {
      setState(errorEntry(state, text, sqlMode ? "sql" : "nl", err.stage, err.message));
    } else {
      reportError("query", err);
    }
  }
  input.value = "";
}

async function refreshWorkflows(): Promise<void> {
  setState(workflowsLoaded(state, await api.workflows()));
}

async function saveWorkflow(): Promise<void> {
  const name = ($("workflow-name") as unknown as HTMLInputElement).value.trim();
  if (!name || !state.sessionId) return;
  try {
    await api.saveWorkflow(state.sessionId, name);
    await refreshWorkflows();
  } catch (err) {
    reportError("workflow save", err);
  }
}

async function clearRecording(): Promise<void> {
  if (!state.sessionId) return;
  await api.utterance(state.sessionId, "clear the workflow");
  setState(recordingCleared(state));
}

async function applyWorkflow(name: string): Promise<void> {
  const picker = $("apply-doc") as unknown as HTMLSelectElement;
  const docId = picker.value || state.docId;
  if (!docId) return;
  try {
    const outcome = await api.applyWorkflow(name, docId);
    const panel = $("apply-results");
    panel.innerHTML = "";
    if (outcome.template_warning) {
      const warn = document.createElement("div");
      warn.className = "warning";
      warn.textContent = outcome.template_warning;
      panel.appendChild(warn);
    }
    outcome.steps.forEach((step, i) => {
      const div = document.createElement("div");
      div.className = step.empty ? "step empty" : "step";
      div.textContent = `step ${i + 1}: ${step.empty ? "EMPTY" : `${step.relation?.rows.length} row(s)`}`;
      panel.appendChild(div);
      if (step.relation && step.relation.rows.length > 0) {
        panel.appendChild(
          renderTable(step.relation.columns.map((c) => c.name), step.relation.rows, ""),
        );
      }
    });
  } catch (err) {
    reportError("workflow apply", err);
  }
}

async function onCanvasClick(event: MouseEvent): Promise<void> {
  if (!state.entities || !state.docId) return;
  const canvas = event.currentTarget as HTMLCanvasElement;
  const rect = canvas.getBoundingClientRect();
  const x = (event.clientX - rect.left) / SCALE;
  const y = (event.clientY - rect.top) / SCALE;
  const wordId = wordAt(state.entities, x, y);
  setState(wordSelected(state, wordId));
  const panel = $("inspector");
  panel.innerHTML = "";
  if (wordId === null) return;
  for (const section of await inspectWord(api, state.docId, wordId)) {
    const title = document.createElement("h4");
    title.textContent = section.table;
    panel.appendChild(title);
    panel.appendChild(renderTable(section.columns, section.rows, ""));
  }
}

function reportError(stage: string, err: unknown): void {
  const message = err instanceof Error ? err.message : String(err);
  $("status").textContent = `${stage} failed: ${message}`;
}

function init(): void {
  for (const kind of Object.keys(OVERLAY_COLORS) as OverlayKind[]) {
    const checkbox = $(`toggle-${kind}`) as unknown as HTMLInputElement;
    checkbox.onchange = () => setState(toggleOverlay(state, kind));
  }
  ($("file-input") as unknown as HTMLInputElement).onchange = (event) => {
    const files = (event.target as HTMLInputElement).files;
    if (files && files[0]) void loadDocument(files[0]);
  };
  $("run-query").onclick = () => void runQuery();
  ($("query-input") as unknown as HTMLInputElement).onkeydown = (event) => {
    if (event.key === "Enter") void runQuery();
  };
  $("save-workflow").onclick = () => void saveWorkflow();
  $("clear-recording").onclick = () => void clearRecording();
  ($("page") as unknown as HTMLCanvasElement).onclick = (event) =>
    void onCanvasClick(event);
  void refreshWorkflows();
}

init();
