"""Natural-language front end: intent classification, slot-value
recognition, template and table mapping, SQL composition, and routing.

Every stage is a deterministic pattern/lexicon classifier sitting behind a
small function interface, so a learned backend can replace any single
stage without touching the others.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .entities import word_match_text
from .errors import (DocrelateError, EmptyUtterance, SlotArityMismatch,
                     UnknownRelationPhrase, UnmappableUtterance)
from .query import (Eq, IdInSubquery, PosDiff, PosExpr, QueryAST, Select,
                    SubstrSelect, evaluate_provenance, execute_and_stage,
                    print_sql)
from .relstore import Relation
from .session import SessionState
from .workflow import (WorkflowRegistry, apply_workflow, clear_workflow,
                       record_step, save_workflow)

PLACEHOLDER = "<COND_VAL>"


class Intent(Enum):
    EXTRACTION = "extraction"
    WORKFLOW = "workflow"
    BOOKKEEPING = "bookkeeping"


class TemplateId(Enum):
    T0_GENERIC = "T0_generic"
    T1_ID_SUBQUERY = "T1_id_subquery"
    T2_PRIMARY_EQ = "T2_primary_eq"
    T3_SUBSTR_FROM = "T3_substr_from"
    T4_SUBSTR_BETWEEN = "T4_substr_between"


@dataclass(frozen=True)
class NormalizedUtterance:
    """Utterance with each recognized value replaced by the placeholder."""

    text: str
    values: tuple[str, ...]


@dataclass
class Response:
    kind: str  # "result" | "ack" | "error"
    message: str = ""
    relation: Optional[Relation] = None
    sql: Optional[str] = None
    highlight_word_ids: tuple[int, ...] = ()
    stage: Optional[str] = None


# --- configuration loading -----------------------------------------------------

_DATA_DIR = Path(__file__).parent / "data"


def _builtin_text(name: str) -> str:
    return (_DATA_DIR / name).read_text(encoding="utf-8")


def parse_synonym_lines(lines: Sequence[str]) -> list[tuple[str, str]]:
    """Flatten the synonym file into ordered (phrase, table) pairs."""
    pairs = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        table, _, phrases = line.partition("\t")
        for phrase in phrases.split(","):
            phrase = phrase.strip().lower()
            if phrase:
                pairs.append((phrase, table.strip()))
    return pairs


def parse_bookkeeping_lines(lines: Sequence[str]) -> list[tuple[str, re.Pattern]]:
    patterns = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        op, _, pattern = line.partition("\t")
        patterns.append((op.strip(), re.compile(pattern.strip(), re.IGNORECASE)))
    return patterns


def load_synonyms(path: str | Path | None = None) -> list[tuple[str, str]]:
    if path is not None:
        return parse_synonym_lines(Path(path).read_text(encoding="utf-8").splitlines())
    return parse_synonym_lines(_builtin_text("synonyms.tsv").splitlines())


def load_bookkeeping(path: str | Path | None = None) -> list[tuple[str, re.Pattern]]:
    if path is not None:
        return parse_bookkeeping_lines(Path(path).read_text(encoding="utf-8").splitlines())
    return parse_bookkeeping_lines(_builtin_text("bookkeeping.tsv").splitlines())


_DEFAULT_SYNONYMS: list[tuple[str, str]] | None = None
_DEFAULT_BOOKKEEPING: list[tuple[str, re.Pattern]] | None = None


def default_synonyms() -> list[tuple[str, str]]:
    global _DEFAULT_SYNONYMS
    if _DEFAULT_SYNONYMS is None:
        _DEFAULT_SYNONYMS = load_synonyms()
    return _DEFAULT_SYNONYMS


def default_bookkeeping() -> list[tuple[str, re.Pattern]]:
    global _DEFAULT_BOOKKEEPING
    if _DEFAULT_BOOKKEEPING is None:
        _DEFAULT_BOOKKEEPING = load_bookkeeping()
    return _DEFAULT_BOOKKEEPING


# --- intent ---------------------------------------------------------------------

_WORKFLOW_NAMING = (
    re.compile(r"^(?:please\s+|kindly\s+)?(?:save|store|record|name|create)\b.*?"
               r"\b(?:as|named|called)\s+[\"']?(?P<name>[A-Za-z0-9_][\w-]*)[\"']?\s*[.!]?$",
               re.IGNORECASE),
    re.compile(r"^(?:please\s+)?(?:create|start|begin)\s+(?:a\s+)?(?:new\s+)?workflow"
               r"(?:\s+(?P<name>[A-Za-z0-9_][\w-]*))?\s*[.!]?$", re.IGNORECASE),
)


def classify_intent(utterance: str,
                    bookkeeping=None) -> Intent:
    """Deterministic cascade: book-keeping patterns, then workflow naming,
    then extraction as the default."""
    if not utterance or not utterance.strip():
        raise EmptyUtterance("cannot classify an empty utterance")
    text = utterance.strip()
    for _, pattern in (bookkeeping if bookkeeping is not None else default_bookkeeping()):
        if pattern.match(text):
            return Intent.BOOKKEEPING
    for pattern in _WORKFLOW_NAMING:
        if pattern.match(text):
            return Intent.WORKFLOW
    return Intent.EXTRACTION


def match_bookkeeping_op(utterance: str, bookkeeping=None) -> tuple[str, Optional[str]]:
    """Which book-keeping operation an utterance requests, plus a name."""
    text = utterance.strip()
    for op, pattern in (bookkeeping if bookkeeping is not None else default_bookkeeping()):
        m = pattern.match(text)
        if m:
            name = m.groupdict().get("name")
            return op, name
    raise UnmappableUtterance(f"not a book-keeping utterance: {utterance!r}")


def match_workflow_name(utterance: str) -> Optional[str]:
    for pattern in _WORKFLOW_NAMING:
        m = pattern.match(utterance.strip())
        if m:
            return m.groupdict().get("name")
    return None


# --- slot-value recognition -------------------------------------------------------

# Function words and query-machinery vocabulary never treated as document
# values, even when the document happens to contain them.
RESERVED_TERMS = frozenset("""
    a an the of to in on at for and or is are was were it its this that these
    those me my we you your all any each no not there here get fetch find
    show give tell display list dump bring please kindly want need word words
    line lines block blocks box boxes key keys value values table tables row
    rows text substring sub-string information info right left above below
    under over beneath underneath next before after between containing
    contains has have having which what who how where when why written towards
    immediately directly side previous result output last earlier temp
    temporary from workflow workflows document documents page data type types
    date dates number numbers field fields label use using
""".split())


def build_doc_lexicon(entities, aliases: dict[str, str] | None = None) -> frozenset[str]:
    """Recognition vocabulary: document words, key phrases, alias canon.

    Reserved function words are excluded so politeness tokens and query
    machinery in an utterance never register as document values.
    """
    terms = set()
    for w in entities.words:
        terms.add(word_match_text(w.text))
    for kv in entities.key_values:
        terms.add(kv.key_text)
    for canonical in (aliases or {}).values():
        terms.add(canonical)
    return frozenset(t for t in terms
                     if len(t) >= 2 and t.lower() not in RESERVED_TERMS)


_QUOTED = re.compile(r"(?<!\w)'([^']+)'(?!\w)|\"([^\"]+)\"")


def recognize_cond_values(utterance: str,
                          doc_lexicon: frozenset[str]) -> NormalizedUtterance:
    """Longest-match, case-insensitive lexicon search over the utterance.

    Quoted spans always match. Overlaps resolve longest-first, then
    leftmost. Matched spans are replaced by the placeholder; the recorded
    values are the literal utterance substrings, so re-inserting them
    reconstructs the input.
    """
    spans: list[tuple[int, int]] = []

    def overlaps(start: int, end: int) -> bool:
        return any(not (end <= s or start >= e) for s, e in spans)

    for m in _QUOTED.finditer(utterance):
        group = 1 if m.group(1) is not None else 2
        spans.append((m.start(group), m.end(group)))

    candidates: list[tuple[int, int]] = []
    for term in doc_lexicon:
        pattern = re.compile(rf"(?<!\w){re.escape(term)}(?!\w)", re.IGNORECASE)
        for m in pattern.finditer(utterance):
            candidates.append((m.start(), m.end()))
    candidates.sort(key=lambda se: (-(se[1] - se[0]), se[0]))
    for start, end in candidates:
        if not overlaps(start, end):
            spans.append((start, end))

    spans.sort()
    values = tuple(utterance[s:e] for s, e in spans)
    out = []
    prev = 0
    for s, e in spans:
        out.append(utterance[prev:s])
        out.append(PLACEHOLDER)
        prev = e
    out.append(utterance[prev:])
    return NormalizedUtterance(text="".join(out), values=values)


# --- template mapping ---------------------------------------------------------------

_PH = re.escape(PLACEHOLDER.lower())
_Q = "[\"']?"
_SUBSTR_CUE = re.compile(r"\b(?:substring|substr|sub-string|text|what(?:'s| is) written)\b")
_BETWEEN = re.compile(rf"\bbetween\b\s+{_Q}{_PH}{_Q}\s+\band\b\s+{_Q}{_PH}{_Q}")
_AFTER_CUE = re.compile(
    rf"\b(?:right of|after|following|towards (?:the )?right of|past)\b.*{_PH}")
_ENTITY_CUE = re.compile(r"\b(?:block|line|box)\b")
_CONTAIN_CUE = re.compile(
    rf"\b(?:containing|contains|that contains|which has|that has|has|have|having|with|holding)\b.*{_PH}")
_DIRECTION_CUE = re.compile(
    rf"\b(?:right|left|above|below|under|over|beneath|underneath|next to|beside|"
    rf"before|on top of|value of|value for|key)\b.*{_PH}")
_DUMP_CUE = re.compile(
    r"^\s*(?:please\s+|kindly\s+)?(?:show|list|display|dump|give|get|fetch)\b"
    r".*\b(?:words|lines|blocks|boxes|key values|key value pairs|keys|typed words|data types)\b")


def map_template(n: NormalizedUtterance) -> TemplateId:
    """Deterministic phrase-pattern classifier over the normalized text."""
    text = n.text.lower()
    has_value = len(n.values) >= 1
    if _SUBSTR_CUE.search(text) and _BETWEEN.search(text) and len(n.values) >= 2:
        return TemplateId.T4_SUBSTR_BETWEEN
    if _SUBSTR_CUE.search(text) and _AFTER_CUE.search(text) and has_value:
        return TemplateId.T3_SUBSTR_FROM
    if _ENTITY_CUE.search(text) and _CONTAIN_CUE.search(text) and has_value:
        return TemplateId.T1_ID_SUBQUERY
    if _DIRECTION_CUE.search(text) and has_value:
        return TemplateId.T2_PRIMARY_EQ
    if _DUMP_CUE.search(text):
        return TemplateId.T0_GENERIC
    if has_value:
        return TemplateId.T0_GENERIC
    raise UnmappableUtterance(
        f"no template pattern matched and no values recognized: {n.text!r}")


# --- table mapping ------------------------------------------------------------------

_TEMP_TABLE = "TEMP"


def map_table(n: NormalizedUtterance, context: str = "fresh",
              synonyms: list[tuple[str, str]] | None = None) -> str:
    """Resolve the relation phrase to a table name.

    Previous-result phrasing (or an explicit from_temp context) forces
    TEMP regardless of other phrase matches.
    """
    if synonyms is None:
        synonyms = default_synonyms()
    text = n.text.lower()
    if context == "from_temp":
        return _TEMP_TABLE

    best: tuple[int, int] | None = None  # (-len, config order)
    best_table = None
    for order, (phrase, table) in enumerate(synonyms):
        if re.search(rf"(?<!\w){re.escape(phrase)}(?!\w)", text):
            if table == _TEMP_TABLE:  # previous-result phrasing always wins
                return _TEMP_TABLE
            key = (-len(phrase), order)
            if best is None or key < best:
                best = key
                best_table = table
    if best_table is None:
        raise UnknownRelationPhrase(f"no relation phrase found in {n.text!r}")
    return best_table


# --- SQL composition ----------------------------------------------------------------

_GROUP_ID_COL = {"block_lines": "block_id", "box_lines": "box_id"}
_COND_COL = {
    "rightof": "anchor_text", "leftof": "anchor_text",
    "above": "anchor_text", "below": "anchor_text",
    "key_value": "key", "line_below_word": "word_text",
    "words": "text", "lines": "text", "typed_words": "data_type",
    "block_lines": "line", "box_lines": "line", "blocks": "block_id",
    "boxes": "box_id", "TEMP": "text",
}
_SOURCE_COL = {"lines": "text", "words": "text"}


def compose_sql(template: TemplateId, table: str,
                values: Sequence[str]) -> QueryAST:
    """Fill the template's slots; the result is valid under the grammar."""
    def need(count: int):
        if len(values) < count:
            raise SlotArityMismatch(
                f"{template.value} needs {count} value(s), got {len(values)}")

    if template is TemplateId.T1_ID_SUBQUERY:
        need(1)
        gid = _GROUP_ID_COL.get(table, "line_id")
        inner = Select(columns=(gid,), table="words",
                       where=Eq(column="text", literal=values[0]))
        return Select(columns=None, table=table,
                      where=IdInSubquery(column=gid, subquery=inner))
    if template is TemplateId.T2_PRIMARY_EQ:
        need(1)
        cond = _COND_COL.get(table, "text")
        columns = ("key", "value") if table == "key_value" else None
        return Select(columns=columns, table=table,
                      where=Eq(column=cond, literal=values[0]))
    if template is TemplateId.T3_SUBSTR_FROM:
        need(1)
        return SubstrSelect(source_col=_SOURCE_COL.get(table, "line"),
                            start=PosExpr(values[0]), length=None, table=table)
    if template is TemplateId.T4_SUBSTR_BETWEEN:
        need(2)
        first, second = values[0], values[1]
        return SubstrSelect(source_col=_SOURCE_COL.get(table, "line"),
                            start=PosExpr(first),
                            length=PosDiff(end=PosExpr(second), start=PosExpr(first)),
                            table=table)
    # T0: bare dump, or a best-effort equality lookup when a value exists
    if values:
        cond = _COND_COL.get(table, "text")
        return Select(columns=None, table=table,
                      where=Eq(column=cond, literal=values[0]))
    return Select(columns=None, table=table, where=None)


# --- highlight provenance -------------------------------------------------------------

_ID_COLUMNS = ("word_id", "anchor_id", "neighbor_id")
_LINE_COLUMNS = ("line_id", "below_line_id")


def highlight_word_ids(relation: Relation, session: SessionState) -> tuple[int, ...]:
    """Word ids that contributed to the rows of a result relation."""
    line_words = {l.line_id: l.word_ids for l in session.entities.lines}
    block_lines = {b.block_id: b.line_ids for b in session.entities.blocks}
    ids: set[int] = set()
    names = relation.column_names
    has_line_col = any(c in names for c in _LINE_COLUMNS)
    for row in relation.rows:
        for col, cell in zip(names, row):
            if col in _ID_COLUMNS and isinstance(cell, int) and cell >= 0:
                ids.add(cell)
            elif col in _LINE_COLUMNS and isinstance(cell, int) and cell >= 0:
                ids.update(line_words.get(cell, ()))
            elif col == "block_id" and not has_line_col \
                    and isinstance(cell, int) and cell >= 0:
                for lid in block_lines.get(cell, ()):
                    ids.update(line_words.get(lid, ()))
    return tuple(sorted(ids))


# --- routing ----------------------------------------------------------------------------

def _auto_name(registry: WorkflowRegistry) -> str:
    n = 1
    while f"workflow-{n}" in registry.names():
        n += 1
    return f"workflow-{n}"


def handle_utterance(utterance: str, session: SessionState,
                     workflows: WorkflowRegistry | None = None,
                     synonyms: list[tuple[str, str]] | None = None,
                     bookkeeping=None) -> Response:
    """Route one utterance through the full pipeline.

    Extraction queries compile to SQL, execute with TEMP staging, and are
    appended to the session recording; workflow and book-keeping
    utterances manage the recording itself. Failures surface as an error
    response naming the stage that rejected the input.
    """
    workflows = workflows if workflows is not None else WorkflowRegistry()
    stage = "intent"
    try:
        intent = classify_intent(utterance, bookkeeping)

        if intent is Intent.BOOKKEEPING:
            stage = "bookkeeping"
            return _handle_bookkeeping(utterance, session, workflows, bookkeeping)
        if intent is Intent.WORKFLOW:
            stage = "workflow"
            name = match_workflow_name(utterance) or _auto_name(workflows)
            wf = save_workflow(session, name, workflows)
            return Response(kind="ack",
                            message=f"saved workflow '{wf.name}' with {len(wf.steps)} step(s)")

        stage = "recognize"
        normalized = recognize_cond_values(utterance, session.lexicon_terms)
        stage = "map_template"
        template = map_template(normalized)
        stage = "map_table"
        table = map_table(normalized, context="fresh", synonyms=synonyms)
        stage = "compose"
        ast = compose_sql(template, table, normalized.values)
        sql = print_sql(ast)
        stage = "execute"
        provenance = evaluate_provenance(ast, session.db)  # before TEMP moves
        relation = execute_and_stage(sql, session.db)
        record_step(session, utterance, sql)
        return Response(kind="result",
                        message=f"{len(relation)} row(s)",
                        relation=relation, sql=sql,
                        highlight_word_ids=highlight_word_ids(provenance, session))
    except DocrelateError as exc:
        return Response(kind="error", message=str(exc), stage=stage)


def _handle_bookkeeping(utterance: str, session: SessionState,
                        workflows: WorkflowRegistry,
                        bookkeeping=None) -> Response:
    op, name = match_bookkeeping_op(utterance, bookkeeping)
    if op == "clear":
        clear_workflow(session)
        return Response(kind="ack", message="workflow recording cleared")
    if op == "save":
        wf = save_workflow(session, name or _auto_name(workflows), workflows)
        return Response(kind="ack",
                        message=f"saved workflow '{wf.name}' with {len(wf.steps)} step(s)")
    if op == "list":
        names = ", ".join(workflows.names()) or "(none)"
        return Response(kind="ack", message=f"workflows: {names}")
    if op == "apply":
        wf_name = name or workflows.most_recent().name
        outcome = apply_workflow(wf_name, session.db, workflows)
        flagged = sum(1 for s in outcome.steps if s.empty)
        last = outcome.steps[-1].relation if outcome.steps else None
        message = f"applied '{wf_name}': {len(outcome.steps)} step(s), {flagged} empty"
        return Response(kind="result", message=message, relation=last,
                        sql=outcome.steps[-1].sql_text if outcome.steps else None,
                        highlight_word_ids=(highlight_word_ids(last, session)
                                            if last is not None else ()))
    raise UnmappableUtterance(f"unsupported book-keeping op {op!r}")
