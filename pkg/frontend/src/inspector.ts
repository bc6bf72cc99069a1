// Click-to-inspect: gather the relation rows that mention a word, fetched
// from the documented tables endpoint (no client-side derivation).

import type { WorkbenchApi } from "./api.js";
import type { RelationPayload } from "./types.js";

export interface InspectorSection {
  table: string;
  columns: string[];
  rows: (string | number)[][];
}

const WORD_RELATIONS = ["rightof", "leftof", "above", "below", "line_below_word"];

function rowsMentioning(relation: RelationPayload, wordId: number): (string | number)[][] {
  const idColumns = relation.columns
    .map((c, i) => ({ name: c.name, i }))
    .filter(({ name }) => name === "word_id" || name === "anchor_id");
  return relation.rows.filter((row) =>
    idColumns.some(({ i }) => row[i] === wordId),
  );
}

export async function inspectWord(
  api: WorkbenchApi,
  docId: string,
  wordId: number,
): Promise<InspectorSection[]> {
  const sections: InspectorSection[] = [];
  for (const table of WORD_RELATIONS) {
    const relation = await api.table(docId, table);
    const rows = rowsMentioning(relation, wordId);
    if (rows.length > 0) {
      sections.push({
        table,
        columns: relation.columns.map((c) => c.name),
        rows,
      });
    }
  }
  return sections;
}
