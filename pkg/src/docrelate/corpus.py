"""Loader and evaluator for the annotated utterance corpus.

Corpus rows: utterance<TAB>intent<TAB>template<TAB>table<TAB>values,
with "-" marking fields that do not apply to non-extraction rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import DocrelateError
from .nl import (Intent, classify_intent, map_table, map_template,
                 recognize_cond_values)

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class CorpusRow:
    utterance: str
    intent: str
    template: str | None  # None when not applicable
    table: str | None
    values: tuple[str, ...] | None


@dataclass(frozen=True)
class CorpusMetrics:
    total: int
    intent_correct: int
    intent_total: int
    template_correct: int
    template_total: int
    table_correct: int
    table_total: int
    values_correct: int
    values_total: int

    @property
    def intent_accuracy(self) -> float:
        return self.intent_correct / self.intent_total

    @property
    def template_accuracy(self) -> float:
        return self.template_correct / self.template_total

    @property
    def table_accuracy(self) -> float:
        return self.table_correct / self.table_total

    @property
    def values_accuracy(self) -> float:
        return self.values_correct / self.values_total


def load_corpus(path: str | Path | None = None) -> list[CorpusRow]:
    if path is None:
        path = _DATA_DIR / "nl_corpus.tsv"
    rows = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) == 4:  # trailing empty values field
            parts.append("")
        if len(parts) != 5:
            raise DocrelateError(f"corpus row needs 5 fields, got {len(parts)}: {raw!r}")
        utterance, intent, template, table, values = parts
        rows.append(CorpusRow(
            utterance=utterance,
            intent=intent,
            template=None if template == "-" else template,
            table=None if table == "-" else table,
            values=None if values == "-" else tuple(v for v in values.split(",") if v),
        ))
    return rows


def evaluate_corpus(rows: list[CorpusRow], lexicon_terms: frozenset[str],
                    synonyms=None, bookkeeping=None) -> CorpusMetrics:
    """Score each deterministic NL stage against the annotations.

    A stage that raises on a row counts as a miss for that row, mirroring
    how a classifier returning the wrong label would score.
    """
    intent_ok = template_ok = table_ok = values_ok = 0
    template_n = table_n = values_n = 0
    for row in rows:
        predicted = classify_intent(row.utterance, bookkeeping)
        if predicted.value == row.intent:
            intent_ok += 1

        if row.intent != Intent.EXTRACTION.value:
            continue
        normalized = recognize_cond_values(row.utterance, lexicon_terms)

        if row.values is not None:
            values_n += 1
            if normalized.values == row.values:
                values_ok += 1
        if row.template is not None:
            template_n += 1
            try:
                if map_template(normalized).value == row.template:
                    template_ok += 1
            except DocrelateError:
                pass
        if row.table is not None:
            table_n += 1
            try:
                if map_table(normalized, synonyms=synonyms) == row.table:
                    table_ok += 1
            except DocrelateError:
                pass
    return CorpusMetrics(
        total=len(rows),
        intent_correct=intent_ok, intent_total=len(rows),
        template_correct=template_ok, template_total=template_n,
        table_correct=table_ok, table_total=table_n,
        values_correct=values_ok, values_total=values_n,
    )
