"""In-memory relational store holding one document's derived schema.

Thirteen base relations are always present (possibly empty); a session may
additionally stage one TEMP relation holding the previous query result.
Nullable ids are encoded as -1 and absent text as the literal "null".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .entities import (ADJACENCY_RELATIONS, NULL_ID, NULL_TEXT,
                       DocumentEntities)
from .errors import SchemaViolation, UnknownTable

TEXT = "text"
INTEGER = "integer"

BASE_RELATIONS = (
    "words", "lines", "blocks", "boxes", "block_lines", "box_lines",
    "rightof", "leftof", "above", "below",
    "line_below_word", "key_value", "typed_words",
)

_ADJ_COLUMNS = (("anchor_id", INTEGER), ("anchor_text", TEXT),
                ("neighbor_id", INTEGER), ("neighbor_text", TEXT))

SCHEMA: dict[str, tuple[tuple[str, str], ...]] = {
    "words": (("word_id", INTEGER), ("text", TEXT),
              ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER),
              ("line_id", INTEGER), ("block_id", INTEGER), ("box_id", INTEGER)),
    "lines": (("line_id", INTEGER), ("text", TEXT),
              ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER),
              ("block_id", INTEGER), ("box_id", INTEGER)),
    "blocks": (("block_id", INTEGER),
               ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER)),
    "boxes": (("box_id", INTEGER),
              ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER)),
    "block_lines": (("block_id", INTEGER), ("line_id", INTEGER), ("line", TEXT),
                    ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER)),
    "box_lines": (("box_id", INTEGER), ("line_id", INTEGER), ("line", TEXT),
                  ("x0", INTEGER), ("y0", INTEGER), ("x1", INTEGER), ("y1", INTEGER)),
    "rightof": _ADJ_COLUMNS,
    "leftof": _ADJ_COLUMNS,
    "above": _ADJ_COLUMNS,
    "below": _ADJ_COLUMNS,
    "line_below_word": (("word_id", INTEGER), ("word_text", TEXT),
                        ("below_line_id", INTEGER), ("below_line_text", TEXT),
                        ("block_id", INTEGER)),
    "key_value": (("key", TEXT), ("value", TEXT), ("source", TEXT),
                  ("line_id", INTEGER)),
    "typed_words": (("word_id", INTEGER), ("text", TEXT), ("data_type", TEXT)),
}


@dataclass(frozen=True)
class Relation:
    name: str
    columns: tuple[tuple[str, str], ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise SchemaViolation(
                    f"{self.name}: row arity {len(row)} != {len(self.columns)}")
            for cell, (col, ctype) in zip(row, self.columns):
                if ctype == INTEGER and not (isinstance(cell, int) and not isinstance(cell, bool)):
                    raise SchemaViolation(f"{self.name}.{col}: {cell!r} is not an integer")
                if ctype == TEXT and not isinstance(cell, str):
                    raise SchemaViolation(f"{self.name}.{col}: {cell!r} is not text")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    def column_index(self, name: str) -> int:
        for i, (col, _) in enumerate(self.columns):
            if col == name:
                return i
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.rows)


def make_relation(name: str, columns: Iterable[tuple[str, str]],
                  rows: Iterable[Iterable]) -> Relation:
    return Relation(name=name, columns=tuple(columns),
                    rows=tuple(tuple(r) for r in rows))


@dataclass
class RelationDB:
    doc_id: str
    relations: dict[str, Relation] = field(default_factory=dict)
    temp: Relation | None = None

    def get_table(self, name: str) -> Relation:
        if name == "TEMP":
            if self.temp is None:
                raise UnknownTable("no TEMP relation has been staged")
            return self.temp
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownTable(f"unknown relation {name!r}") from None

    def stage_temp(self, relation: Relation) -> None:
        self.temp = replace(relation, name="TEMP")

    def clear_temp(self) -> None:
        self.temp = None


def populate(doc_id: str, entities: DocumentEntities) -> RelationDB:
    """Build all base relations from one document's entities.

    Pure function of its input: identical entities produce identical
    relations, rows ordered by their leading id column.
    """
    words = entities.words
    line_of_word = {}
    for line in entities.lines:
        for wid in line.word_ids:
            line_of_word[wid] = line
    line_by_id = {l.line_id: l for l in entities.lines}

    word_rows = []
    for w in sorted(words, key=lambda w: w.word_id):
        line = line_of_word.get(w.word_id)
        word_rows.append((
            w.word_id, w.text, *w.bbox,
            line.line_id if line else NULL_ID,
            line.block_id if line else NULL_ID,
            entities.word_box.get(w.word_id, NULL_ID),
        ))

    line_rows = [(l.line_id, l.text, *l.bbox, l.block_id, l.box_id)
                 for l in sorted(entities.lines, key=lambda l: l.line_id)]
    block_rows = [(b.block_id, *b.bbox)
                  for b in sorted(entities.blocks, key=lambda b: b.block_id)]
    box_rows = [(b.box_id, *b.bbox)
                for b in sorted(entities.boxes, key=lambda b: b.box_id)]

    block_line_rows = []
    for b in sorted(entities.blocks, key=lambda b: b.block_id):
        for lid in b.line_ids:
            line = line_by_id[lid]
            block_line_rows.append((b.block_id, lid, line.text, *line.bbox))

    box_line_rows = [(l.box_id, l.line_id, l.text, *l.bbox)
                     for l in sorted(entities.lines, key=lambda l: l.line_id)
                     if l.box_id != NULL_ID]

    adj_rows: dict[str, list[tuple]] = {rel: [] for rel in ADJACENCY_RELATIONS}
    for row in entities.adjacency:
        adj_rows[row.relation].append(
            (row.anchor_word_id, row.anchor_text,
             row.neighbor_word_id, row.neighbor_text))
    for rel in adj_rows:
        adj_rows[rel].sort(key=lambda r: r[0])

    below_rows = [(r.word_id, r.word_text, r.below_line_id, r.below_line_text,
                   r.block_id)
                  for r in sorted(entities.line_below, key=lambda r: r.word_id)]
    kv_rows = [(r.key_text, r.value_text, r.source, r.line_id)
               for r in sorted(entities.key_values, key=lambda r: r.line_id)]
    text_by_id = {w.word_id: w.text for w in words}
    typed_rows = [(r.word_id, text_by_id[r.word_id], r.data_type)
                  for r in sorted(entities.typed_words, key=lambda r: r.word_id)]

    data = {
        "words": word_rows, "lines": line_rows, "blocks": block_rows,
        "boxes": box_rows, "block_lines": block_line_rows,
        "box_lines": box_line_rows,
        "rightof": adj_rows["rightof"], "leftof": adj_rows["leftof"],
        "above": adj_rows["above"], "below": adj_rows["below"],
        "line_below_word": below_rows, "key_value": kv_rows,
        "typed_words": typed_rows,
    }
    relations = {name: make_relation(name, SCHEMA[name], data[name])
                 for name in BASE_RELATIONS}
    return RelationDB(doc_id=doc_id, relations=relations)


def get_table(db: RelationDB, name: str) -> Relation:
    return db.get_table(name)


def stage_temp(db: RelationDB, relation: Relation) -> None:
    db.stage_temp(relation)


def clear_temp(db: RelationDB) -> None:
    db.clear_temp()


# --- flat-file persistence ----------------------------------------------------

def _escape(cell: str) -> str:
    return (cell.replace("\\", "\\\\").replace("\t", "\\t")
            .replace("\n", "\\n").replace("\r", "\\r"))


def _unescape(cell: str) -> str:
    out = []
    i = 0
    while i < len(cell):
        c = cell[i]
        if c == "\\" and i + 1 < len(cell):
            nxt = cell[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def dump_db(db: RelationDB, root: str | Path) -> Path:
    """Write db/<doc_id>/<relation>.tsv with a header row per relation."""
    out_dir = Path(root) / db.doc_id
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in BASE_RELATIONS:
        rel = db.relations[name]
        lines = ["\t".join(rel.column_names)]
        for row in rel.rows:
            lines.append("\t".join(
                _escape(cell) if isinstance(cell, str) else str(cell)
                for cell in row))
        (out_dir / f"{name}.tsv").write_text("\n".join(lines) + "\n",
                                             encoding="utf-8")
    return out_dir


def load_db(doc_dir: str | Path) -> RelationDB:
    """Reload a dumped document database."""
    doc_dir = Path(doc_dir)
    relations = {}
    for name in BASE_RELATIONS:
        path = doc_dir / f"{name}.tsv"
        if not path.exists():
            raise UnknownTable(f"missing relation file {path}")
        text = path.read_text(encoding="utf-8")
        rows = []
        lines = text.splitlines()
        header = tuple(lines[0].split("\t"))
        columns = SCHEMA[name]
        if header != tuple(c for c, _ in columns):
            raise SchemaViolation(f"{name}: header {header} does not match schema")
        for raw in lines[1:]:
            if not raw:
                continue
            cells = raw.split("\t")
            row = []
            for cell, (_, ctype) in zip(cells, columns):
                row.append(int(cell) if ctype == INTEGER else _unescape(cell))
            rows.append(tuple(row))
        relations[name] = make_relation(name, columns, rows)
    return RelationDB(doc_id=doc_dir.name, relations=relations)


NULL_TEXT_LITERAL = NULL_TEXT
