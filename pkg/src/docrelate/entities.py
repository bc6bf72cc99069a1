"""Derive lines, text blocks, box membership, word adjacency, key-value
pairs, and abstract data types from OCR words and detected boxes."""

from __future__ import annotations

import re
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, EngineConfig
from .ingest import RawDocument, Word
from .lexicons import Lexicons, canonicalize_alias
from .raster_ops import BoxRegion, detect_boxes

NULL_TEXT = "null"
NULL_ID = -1

ADJACENCY_RELATIONS = ("leftof", "rightof", "above", "below")


def word_match_text(text: str) -> str:
    """Query-matchable form of a word: trailing colons stripped.

    OCR glues key glyphs to their colon ("SWIFT:"); queries reference the
    bare key. Pure punctuation tokens are kept as-is.
    """
    stripped = text.rstrip(":")
    return stripped if stripped else text


@dataclass
class Line:
    line_id: int
    word_ids: list[int]
    text: str
    bbox: tuple[int, int, int, int]
    block_id: int = NULL_ID
    box_id: int = NULL_ID


@dataclass
class TextBlock:
    block_id: int
    line_ids: list[int]
    bbox: tuple[int, int, int, int]


@dataclass(frozen=True)
class AdjacencyRow:
    relation: str
    anchor_word_id: int
    anchor_text: str
    neighbor_word_id: int  # NULL_ID when absent
    neighbor_text: str     # "null" when absent


@dataclass(frozen=True)
class LineBelowRow:
    word_id: int
    word_text: str
    below_line_id: int   # NULL_ID when the word sits on the block's last line
    below_line_text: str
    block_id: int


@dataclass(frozen=True)
class KeyValueRow:
    key_text: str
    value_text: str
    source: str  # always "colon": the only pattern OCR text supports
    line_id: int


@dataclass(frozen=True)
class TypedWordRow:
    word_id: int
    data_type: str


@dataclass
class DocumentEntities:
    """All derived entities for one document."""

    words: list[Word]
    lines: list[Line]
    blocks: list[TextBlock]
    boxes: list[BoxRegion]
    word_box: dict[int, int]
    adjacency: list[AdjacencyRow]
    line_below: list[LineBelowRow]
    key_values: list[KeyValueRow]
    typed_words: list[TypedWordRow]


def _bbox_union(boxes: Iterable[tuple[int, int, int, int]]) -> tuple[int, int, int, int]:
    xs0, ys0, xs1, ys1 = zip(*boxes)
    return (min(xs0), min(ys0), max(xs1), max(ys1))


def _v_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> int:
    return min(a[3], b[3]) - max(a[1], b[1])


def _h_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> int:
    return min(a[2], b[2]) - max(a[0], b[0])


def median_word_height(words: Sequence[Word]) -> float:
    if not words:
        return 0.0
    return float(statistics.median(w.height for w in words))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def line_pair_joins(a: Word, b: Word, max_gap: float) -> bool:
    """True when two words belong on one page line (either order).

    They must overlap vertically by at least half the smaller height and
    the horizontal gap between them must be within [-2, max_gap].
    """
    if _v_overlap(a.bbox, b.bbox) < 0.5 * min(a.height, b.height):
        return False
    gap_ab = b.bbox[0] - a.bbox[2]
    gap_ba = a.bbox[0] - b.bbox[2]
    return (-2 <= gap_ab <= max_gap) or (-2 <= gap_ba <= max_gap)


def cluster_lines(words: Sequence[Word], cfg: EngineConfig = DEFAULT_CONFIG) -> list[Line]:
    """Group words into page lines by transitive horizontal adjacency."""
    if not words:
        return []
    max_gap = cfg.line_gap_factor * median_word_height(words)
    n = len(words)
    uf = _UnionFind(n)

    x0 = np.array([w.bbox[0] for w in words])
    y0 = np.array([w.bbox[1] for w in words])
    x1 = np.array([w.bbox[2] for w in words])
    y1 = np.array([w.bbox[3] for w in words])
    heights = y1 - y0

    # joining needs vertical overlap, so only words in the same y band can
    # pair; scanning a sorted band keeps the candidate matrix small
    order = np.argsort(y0, kind="stable")
    sy0, sy1 = y0[order], y1[order]
    max_h = int(heights.max())
    chunk = 256
    for start in range(0, n, chunk):
        idx = order[start:min(start + chunk, n)]
        lo = int(np.searchsorted(sy0, y0[idx].min() - max_h, side="left"))
        hi = int(np.searchsorted(sy0, y1[idx].max(), side="left"))
        cand = order[lo:hi]
        ov = (np.minimum(y1[idx, None], sy1[None, lo:hi])
              - np.maximum(y0[idx, None], sy0[None, lo:hi]))
        min_h = np.minimum(heights[idx, None], heights[cand][None, :])
        gap = x0[cand][None, :] - x1[idx, None]  # gap from chunk word to other
        joins = (ov >= 0.5 * min_h) & (gap >= -2) & (gap <= max_gap)
        for i_local, j_local in zip(*np.nonzero(joins)):
            i, j = int(idx[i_local]), int(cand[j_local])
            if i != j:
                uf.union(i, j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)

    lines = []
    for members in groups.values():
        members.sort(key=lambda i: (words[i].bbox[0], words[i].word_id))
        bbox = _bbox_union([words[i].bbox for i in members])
        text = " ".join(words[i].text for i in members)
        lines.append((bbox, members, text))
    lines.sort(key=lambda item: (item[0][1], item[0][0]))
    return [Line(line_id=i, word_ids=[words[m].word_id for m in members],
                 text=text, bbox=bbox)
            for i, (bbox, members, text) in enumerate(lines)]


def block_pair_chains(upper: Line, lower: Line, x_tol: float) -> bool:
    """True when a line continues the block of the line above it."""
    gap = lower.bbox[1] - upper.bbox[3]
    height = upper.bbox[3] - upper.bbox[1]
    return abs(upper.bbox[0] - lower.bbox[0]) <= x_tol and gap <= 2 * height


def cluster_blocks(lines: Sequence[Line], cfg: EngineConfig = DEFAULT_CONFIG) -> list[TextBlock]:
    """Chain consecutive lines (in y order) into text blocks.

    Also stamps block_id onto the passed lines.
    """
    if not lines:
        return []
    if cfg.block_x_tol is not None:
        x_tol = cfg.block_x_tol
    else:
        median_line_h = statistics.median(l.bbox[3] - l.bbox[1] for l in lines)
        x_tol = cfg.block_x_tol_factor * median_line_h

    blocks: list[TextBlock] = []
    current: list[Line] = []

    def flush():
        if current:
            block = TextBlock(block_id=len(blocks),
                              line_ids=[l.line_id for l in current],
                              bbox=_bbox_union([l.bbox for l in current]))
            for l in current:
                l.block_id = block.block_id
            blocks.append(block)
            current.clear()

    ordered = sorted(lines, key=lambda l: (l.bbox[1], l.bbox[0]))
    for line in ordered:
        if current and not block_pair_chains(current[-1], line, x_tol):
            flush()
        current.append(line)
    flush()
    return blocks


def _containment_frac(inner: tuple[int, int, int, int],
                      outer: tuple[int, int, int, int]) -> float:
    ix = max(0, min(inner[2], outer[2]) - max(inner[0], outer[0]))
    iy = max(0, min(inner[3], outer[3]) - max(inner[1], outer[1]))
    area = (inner[2] - inner[0]) * (inner[3] - inner[1])
    return (ix * iy) / area if area > 0 else 0.0


def _best_box(bbox: tuple[int, int, int, int], boxes: Sequence[BoxRegion],
              frac: float) -> int:
    best = NULL_ID
    best_area = None
    for box in boxes:
        if _containment_frac(bbox, box.bbox) >= frac:
            area = (box.bbox[2] - box.bbox[0]) * (box.bbox[3] - box.bbox[1])
            if best_area is None or area < best_area:
                best, best_area = box.box_id, area
    return best


def assign_box_membership(lines: Sequence[Line], words: Sequence[Word],
                          boxes: Sequence[BoxRegion],
                          cfg: EngineConfig = DEFAULT_CONFIG) -> dict[int, int]:
    """Stamp box_id on lines and return word_id -> box_id for words.

    An entity belongs to the smallest-area box containing at least
    `box_contain_frac` of its bbox area.
    """
    for line in lines:
        line.box_id = _best_box(line.bbox, boxes, cfg.box_contain_frac)
    return {w.word_id: box_id
            for w in words
            if (box_id := _best_box(w.bbox, boxes, cfg.box_contain_frac)) != NULL_ID}


def compute_adjacency(words: Sequence[Word],
                      cfg: EngineConfig = DEFAULT_CONFIG) -> list[AdjacencyRow]:
    """Emit the four nearest-neighbor rows for every word.

    rightof: nearest word starting at or after the anchor's right edge
    (2 px slack) with vertical overlap >= half the smaller height; leftof
    mirrored. above/below need >= 1 px horizontal overlap. Ties break by
    smaller x0, then smaller word_id.
    """
    n = len(words)
    if n == 0:
        return []
    x0 = np.array([w.bbox[0] for w in words])
    y0 = np.array([w.bbox[1] for w in words])
    x1 = np.array([w.bbox[2] for w in words])
    y1 = np.array([w.bbox[3] for w in words])
    heights = y1 - y0

    ids = np.array([w.word_id for w in words])
    id_rank = np.argsort(np.argsort(ids))  # dense rank of word_id
    tie_key = x0.astype(np.int64) * n + id_rank  # orders by (x0, word_id)
    # neighbor arrays indexed by word position; -1 = none
    found = {rel: np.full(n, -1, dtype=int) for rel in ADJACENCY_RELATIONS}

    def scan(order, band_lo, band_hi, relations):
        """Nearest-neighbor search with candidates limited to a sorted band.

        band_lo/band_hi give, per anchor chunk, the candidate slice in the
        sorted order; the slice is a superset of every admissible neighbor.
        """
        sorted_lo = band_lo[order]
        chunk = 256
        big = np.iinfo(np.int64).max
        for start in range(0, n, chunk):
            idx = order[start:min(start + chunk, n)]
            lo = int(np.searchsorted(sorted_lo, band_lo[idx].min() - _max_span, side="left"))
            hi = int(np.searchsorted(sorted_lo, band_hi[idx].max(), side="left"))
            cand = order[lo:hi]
            not_self = idx[:, None] != cand[None, :]
            ov_v = (np.minimum(y1[idx, None], y1[cand][None, :])
                    - np.maximum(y0[idx, None], y0[cand][None, :]))
            ok_v = ov_v >= 0.5 * np.minimum(heights[idx, None], heights[cand][None, :])
            ov_h = (np.minimum(x1[idx, None], x1[cand][None, :])
                    - np.maximum(x0[idx, None], x0[cand][None, :]))
            ok_h = ov_h >= 1
            for rel in relations:
                if rel == "rightof":
                    gap = x0[cand][None, :] - x1[idx, None]
                    ok = (gap >= -2) & ok_v
                elif rel == "leftof":
                    gap = x0[idx, None] - x1[cand][None, :]
                    ok = (gap >= -2) & ok_v
                elif rel == "above":
                    gap = y0[idx, None] - y1[cand][None, :]
                    ok = (gap >= -2) & ok_h
                else:
                    gap = y0[cand][None, :] - y1[idx, None]
                    ok = (gap >= -2) & ok_h
                ok &= not_self
                # minimize gap, then x0, then word_id
                cand_gap = np.where(ok, gap.astype(np.int64), big)
                best_gap = cand_gap.min(axis=1)
                has = best_gap < big
                tie = cand_gap == best_gap[:, None]
                key = np.where(tie & ok, tie_key[cand][None, :], big)
                best = np.argmin(key, axis=1)
                found[rel][idx[has]] = cand[best[has]]

    # left/right neighbors must overlap vertically: y band. above/below
    # neighbors must overlap horizontally: x band.
    _max_span = int(max(heights.max(), (x1 - x0).max()))
    scan(np.argsort(y0, kind="stable"), y0, y1, ("rightof", "leftof"))
    scan(np.argsort(x0, kind="stable"), x0, x1, ("above", "below"))

    rows = []
    for pos, w in enumerate(words):
        anchor_text = word_match_text(w.text)
        for rel in ADJACENCY_RELATIONS:
            j = found[rel][pos]
            if j < 0:
                rows.append(AdjacencyRow(rel, w.word_id, anchor_text,
                                         NULL_ID, NULL_TEXT))
            else:
                rows.append(AdjacencyRow(rel, w.word_id, anchor_text,
                                         int(ids[j]), word_match_text(words[j].text)))
    return rows


def line_below_word(blocks: Sequence[TextBlock], lines: Sequence[Line],
                    words: Sequence[Word]) -> list[LineBelowRow]:
    """For each word, the next line of its block (null on the last line)."""
    line_by_id = {l.line_id: l for l in lines}
    word_by_id = {w.word_id: w for w in words}
    rows = []
    for block in blocks:
        member_lines = sorted((line_by_id[i] for i in block.line_ids),
                              key=lambda l: (l.bbox[1], l.bbox[0]))
        for pos, line in enumerate(member_lines):
            below = member_lines[pos + 1] if pos + 1 < len(member_lines) else None
            for wid in line.word_ids:
                word = word_by_id[wid]
                rows.append(LineBelowRow(
                    word_id=wid,
                    word_text=word_match_text(word.text),
                    below_line_id=below.line_id if below else NULL_ID,
                    below_line_text=below.text if below else NULL_TEXT,
                    block_id=block.block_id,
                ))
    rows.sort(key=lambda r: r.word_id)
    return rows


def extract_key_values(lines: Sequence[Line],
                       cfg: EngineConfig = DEFAULT_CONFIG) -> list[KeyValueRow]:
    """Split colon lines into key-value pairs.

    A line qualifies when at most kv_max_key_words words precede its first
    colon and at least one non-space character follows it.
    """
    rows = []
    for line in lines:
        if ":" not in line.text:
            continue
        before, _, after = line.text.partition(":")
        key = before.strip()
        value = after.strip()
        if not key or not value:
            continue
        if len(key.split()) > cfg.kv_max_key_words:
            continue
        rows.append(KeyValueRow(key_text=key, value_text=value,
                                source="colon", line_id=line.line_id))
    return rows


# --- data typing -------------------------------------------------------------

DATA_TYPES = ("DATE", "AMOUNT", "PHONE", "SWIFT_CODE", "CITY", "COUNTRY", "ZIP", "NONE")

_MONTHS = ("jan", "feb", "mar", "apr", "may", "jun",
           "jul", "aug", "sep", "oct", "nov", "dec")

_DATE_DMY = re.compile(r"(\d{1,2})([/-])(\d{1,2})\2(\d{4})$")
_DATE_YMD = re.compile(r"(\d{4})-(\d{1,2})-(\d{1,2})$")
_DATE_TEXTUAL = re.compile(r"(\d{1,2})\s+([A-Za-z]{3,9})\.?\s+(\d{4})$")

_CURRENCY_SYMBOLS = "$€£₹¥"
_CURRENCY_CODES = frozenset((
    "USD", "EUR", "GBP", "INR", "JPY", "CAD", "AUD", "CHF", "CNY", "BDT", "SGD",
))
_NUMBER_GROUPED = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?$")
_NUMBER_DECIMAL = re.compile(r"\d+\.\d+$")
_NUMBER_PLAIN = re.compile(r"\d+(?:,\d{3})*(?:\.\d+)?$")

_SWIFT = re.compile(r"[A-Z0-9]{8}(?:[A-Z0-9]{3})?$")
_PHONE = re.compile(r"\+?[\d\s\-()]{7,}$")
_ZIP_DIGITS = re.compile(r"\d{4,6}$")
_ZIP_CA = re.compile(r"[A-Z]\d[A-Z]\s?\d[A-Z]\d$", re.IGNORECASE)
_ZIP_UK = re.compile(r"[A-Z]{1,2}\d{1,2}[A-Z]?\s?\d[A-Z]{2}$", re.IGNORECASE)

_STRIP_PUNCT = ".,;:!?\"'"


def _is_date(token: str) -> bool:
    m = _DATE_DMY.match(token)
    if m:
        d, _, mo, _ = m.groups()
        return 1 <= int(d) <= 31 and 1 <= int(mo) <= 12
    m = _DATE_YMD.match(token)
    if m:
        _, mo, d = m.groups()
        return 1 <= int(mo) <= 12 and 1 <= int(d) <= 31
    m = _DATE_TEXTUAL.match(token)
    if m:
        d, mon, _ = m.groups()
        return 1 <= int(d) <= 31 and mon.lower()[:3] in _MONTHS
    return False


def _is_numeric_amount(token: str) -> bool:
    """Decimal point or thousands grouping marks a money-like number."""
    return bool(_NUMBER_GROUPED.match(token) or _NUMBER_DECIMAL.match(token))


def _has_currency_marker(token: str) -> tuple[bool, str]:
    """Detect an embedded currency symbol or ISO code; return (found, rest)."""
    for sym in _CURRENCY_SYMBOLS:
        if token.startswith(sym):
            return True, token[len(sym):].strip()
        if token.endswith(sym):
            return True, token[:-len(sym)].strip()
    upper = token.upper()
    for code in _CURRENCY_CODES:
        if upper.startswith(code):
            return True, token[len(code):].strip()
        if upper.endswith(code):
            return True, token[:-len(code)].strip()
    return False, token


def _is_amount(token: str, neighbors: tuple[str, ...]) -> bool:
    has_cur, rest = _has_currency_marker(token)
    if has_cur:
        return bool(rest) and bool(_NUMBER_PLAIN.match(rest))
    if _is_numeric_amount(token):
        return True
    # plain integer counts only with a currency word next to it on the line
    if _NUMBER_PLAIN.match(token):
        for nb in neighbors:
            cleaned = nb.strip(_STRIP_PUNCT)
            if cleaned in _CURRENCY_SYMBOLS or cleaned.upper() in _CURRENCY_CODES:
                return True
    return False


def _is_swift(token: str) -> bool:
    if not _SWIFT.match(token):
        return False
    if token != token.upper() or not any(c.isalpha() for c in token):
        return False
    return token[4].isalpha() or token[5].isalpha()


def _is_phone(token: str) -> bool:
    return bool(_PHONE.match(token)) and sum(c.isdigit() for c in token) >= 7


def _is_zip(token: str) -> bool:
    return bool(_ZIP_DIGITS.match(token) or _ZIP_CA.match(token)
                or _ZIP_UK.match(token))


def classify_word_type(token: str, neighbors: tuple[str, ...],
                       lexicons: Lexicons) -> str:
    """First matching abstract type, most specific first."""
    cleaned = token.strip(_STRIP_PUNCT)
    if not cleaned:
        return "NONE"
    if _is_date(cleaned):
        return "DATE"
    if _is_amount(cleaned, neighbors):
        return "AMOUNT"
    if _is_swift(cleaned):
        return "SWIFT_CODE"
    if _is_phone(cleaned):
        return "PHONE"
    if _is_zip(cleaned):
        return "ZIP"
    lowered = cleaned.lower()
    if lowered in lexicons.countries:
        return "COUNTRY"
    if lowered in lexicons.cities:
        return "CITY"
    return "NONE"


def tag_data_types(words: Sequence[Word], lines: Sequence[Line],
                   lexicons: Lexicons) -> list[TypedWordRow]:
    """Assign exactly one abstract data type (or NONE) to every word.

    Lines supply the intra-line neighbors consulted by the amount rule
    (a bare integer is money only next to a currency token).
    """
    word_by_id = {w.word_id: w for w in words}
    neighbors: dict[int, tuple[str, ...]] = {}
    for line in lines:
        for pos, wid in enumerate(line.word_ids):
            adj = []
            if pos > 0:
                adj.append(word_by_id[line.word_ids[pos - 1]].text)
            if pos + 1 < len(line.word_ids):
                adj.append(word_by_id[line.word_ids[pos + 1]].text)
            neighbors[wid] = tuple(adj)
    return [TypedWordRow(w.word_id,
                         classify_word_type(w.text, neighbors.get(w.word_id, ()), lexicons))
            for w in words]


def build_entities(doc: RawDocument, cfg: EngineConfig = DEFAULT_CONFIG,
                   lexicons: Lexicons | None = None) -> DocumentEntities:
    """Run the full derivation pipeline over one ingested document."""
    lexicons = lexicons if lexicons is not None else Lexicons()
    lines = cluster_lines(doc.words, cfg)
    blocks = cluster_blocks(lines, cfg)
    boxes = detect_boxes(doc.raster, cfg) if doc.raster is not None else []
    word_box = assign_box_membership(lines, doc.words, boxes, cfg)
    adjacency = compute_adjacency(doc.words, cfg)
    below_rows = line_below_word(blocks, lines, doc.words)
    key_values = extract_key_values(lines, cfg)
    typed = tag_data_types(doc.words, lines, lexicons)
    return DocumentEntities(words=list(doc.words), lines=lines, blocks=blocks,
                            boxes=boxes, word_box=word_box, adjacency=adjacency,
                            line_below=below_rows, key_values=key_values,
                            typed_words=typed)


__all__ = [
    "AdjacencyRow", "DocumentEntities", "KeyValueRow", "Line", "LineBelowRow",
    "TextBlock", "TypedWordRow", "assign_box_membership", "build_entities",
    "canonicalize_alias", "classify_word_type", "cluster_blocks", "cluster_lines",
    "compute_adjacency", "extract_key_values", "line_below_word",
    "line_pair_joins", "block_pair_chains", "median_word_height",
    "tag_data_types", "word_match_text", "NULL_ID", "NULL_TEXT",
    "ADJACENCY_RELATIONS", "DATA_TYPES",
]
