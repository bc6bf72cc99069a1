// Workbench view state. Pure transition functions so the scripted tests
// can drive the exact state the browser renders.

import type { EntitiesPayload, QueryResponse, WorkflowInfo } from "./types.js";

export type OverlayKind = "words" | "lines" | "blocks" | "boxes";

export interface TranscriptEntry {
  input: string;
  mode: "nl" | "sql";
  kind: "result" | "ack" | "error";
  message: string;
  sql: string | null;
  rows: (string | number)[][];
  columns: string[];
  highlightWordIds: number[];
}

export interface ViewState {
  docId: string | null;
  sessionId: string | null;
  entities: EntitiesPayload | null;
  overlays: Record<OverlayKind, boolean>;
  transcript: TranscriptEntry[]; // append-only within a session
  recordedSteps: string[];
  hasTemp: boolean;
  selectedWordId: number | null;
  workflows: WorkflowInfo[];
  flashedWordIds: number[];
}

export function initialState(): ViewState {
  return {
    docId: null,
    sessionId: null,
    entities: null,
    overlays: { words: false, lines: false, blocks: false, boxes: false },
    transcript: [],
    recordedSteps: [],
    hasTemp: false,
    selectedWordId: null,
    workflows: [],
    flashedWordIds: [],
  };
}

export function documentLoaded(
  state: ViewState,
  docId: string,
  sessionId: string,
  entities: EntitiesPayload,
): ViewState {
  return {
    ...initialState(),
    docId,
    sessionId,
    entities,
    overlays: { ...state.overlays },
    workflows: state.workflows,
  };
}

export function toggleOverlay(state: ViewState, kind: OverlayKind): ViewState {
  return {
    ...state,
    overlays: { ...state.overlays, [kind]: !state.overlays[kind] },
  };
}

export function transcriptEntry(
  input: string,
  mode: "nl" | "sql",
  response: QueryResponse,
): TranscriptEntry {
  return {
    input,
    mode,
    kind: response.kind,
    message: response.message,
    sql: response.sql,
    rows: response.relation ? response.relation.rows : [],
    columns: response.relation ? response.relation.columns.map((c) => c.name) : [],
    highlightWordIds: response.highlight_word_ids ?? [],
  };
}

export function queryFinished(
  state: ViewState,
  input: string,
  mode: "nl" | "sql",
  response: QueryResponse,
): ViewState {
  const entry = transcriptEntry(input, mode, response);
  const recorded =
    response.kind === "result"
      ? [...state.recordedSteps, input]
      : state.recordedSteps;
  return {
    ...state,
    transcript: [...state.transcript, entry], // never rewrites history
    recordedSteps: recorded,
    hasTemp: state.hasTemp || response.kind === "result",
    flashedWordIds: entry.highlightWordIds,
  };
}

export function errorEntry(
  state: ViewState,
  input: string,
  mode: "nl" | "sql",
  stage: string,
  message: string,
): ViewState {
  const entry: TranscriptEntry = {
    input,
    mode,
    kind: "error",
    message: `${stage}: ${message}`,
    sql: null,
    rows: [],
    columns: [],
    highlightWordIds: [],
  };
  return { ...state, transcript: [...state.transcript, entry], flashedWordIds: [] };
}

export function recordingCleared(state: ViewState): ViewState {
  return { ...state, recordedSteps: [], hasTemp: false };
}

export function workflowsLoaded(state: ViewState, workflows: WorkflowInfo[]): ViewState {
  return { ...state, workflows };
}

export function wordSelected(state: ViewState, wordId: number | null): ViewState {
  return { ...state, selectedWordId: wordId };
}

/** The console hint shown when a chained query can read TEMP. */
export function previousResultHint(state: ViewState): string | null {
  return state.hasTemp ? "tip: say “from the previous result” to chain on the last result" : null;
}
