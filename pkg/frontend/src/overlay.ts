// Entity overlay geometry and canvas painting. Colors are fixed per
// entity kind so screenshot-based smoke tests can key on them.

import type { EntitiesPayload, Bbox } from "./types.js";
import type { OverlayKind, ViewState } from "./state.js";

export const OVERLAY_COLORS: Record<OverlayKind, string> = {
  words: "#2563eb", // blue
  lines: "#16a34a", // green
  blocks: "#d97706", // amber
  boxes: "#dc2626", // red
};

export const HIGHLIGHT_COLOR = "#facc15"; // yellow flash

export interface OverlayRect {
  kind: OverlayKind;
  id: number;
  bbox: Bbox;
  color: string;
}

export function visibleRects(
  entities: EntitiesPayload,
  overlays: Record<OverlayKind, boolean>,
): OverlayRect[] {
  const rects: OverlayRect[] = [];
  if (overlays.boxes) {
    for (const b of entities.boxes) {
      rects.push({ kind: "boxes", id: b.box_id, bbox: b.bbox, color: OVERLAY_COLORS.boxes });
    }
  }
  if (overlays.blocks) {
    for (const b of entities.blocks) {
      rects.push({ kind: "blocks", id: b.block_id, bbox: b.bbox, color: OVERLAY_COLORS.blocks });
    }
  }
  if (overlays.lines) {
    for (const l of entities.lines) {
      rects.push({ kind: "lines", id: l.line_id, bbox: l.bbox, color: OVERLAY_COLORS.lines });
    }
  }
  if (overlays.words) {
    for (const w of entities.words) {
      rects.push({ kind: "words", id: w.word_id, bbox: w.bbox, color: OVERLAY_COLORS.words });
    }
  }
  return rects;
}

export function highlightRects(state: ViewState): OverlayRect[] {
  if (!state.entities) return [];
  const byId = new Map(state.entities.words.map((w) => [w.word_id, w]));
  const rects: OverlayRect[] = [];
  for (const id of state.flashedWordIds) {
    const word = byId.get(id);
    if (word) rects.push({ kind: "words", id, bbox: word.bbox, color: HIGHLIGHT_COLOR });
  }
  return rects;
}

/** Topmost word under a page-coordinate point, for click-to-inspect. */
export function wordAt(entities: EntitiesPayload, x: number, y: number): number | null {
  for (const w of entities.words) {
    const [x0, y0, x1, y1] = w.bbox;
    if (x >= x0 && x < x1 && y >= y0 && y < y1) return w.word_id;
  }
  return null;
}

export function drawPage(
  ctx: CanvasRenderingContext2D,
  state: ViewState,
  scale: number,
): void {
  if (!state.entities) return;
  const [pw, ph] = state.entities.page_size;
  ctx.clearRect(0, 0, pw * scale, ph * scale);
  // synthetic white page; word text is painted so the document is legible
  // even without a raster
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, pw * scale, ph * scale);
  ctx.fillStyle = "#111827";
  for (const w of state.entities.words) {
    const [x0, y0, , y1] = w.bbox;
    ctx.font = `${Math.max((y1 - y0) * scale - 2, 6)}px sans-serif`;
    ctx.fillText(w.text, x0 * scale, (y1 - 1) * scale);
  }
  ctx.lineWidth = 1.5;
  for (const rect of visibleRects(state.entities, state.overlays)) {
    const [x0, y0, x1, y1] = rect.bbox;
    ctx.strokeStyle = rect.color;
    ctx.strokeRect(x0 * scale, y0 * scale, (x1 - x0) * scale, (y1 - y0) * scale);
  }
  for (const rect of highlightRects(state)) {
    const [x0, y0, x1, y1] = rect.bbox;
    ctx.strokeStyle = rect.color;
    ctx.lineWidth = 3;
    ctx.strokeRect(x0 * scale, y0 * scale, (x1 - x0) * scale, (y1 - y0) * scale);
    ctx.lineWidth = 1.5;
  }
}
