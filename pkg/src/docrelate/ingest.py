"""Parse OCR output (Tesseract TSV, hOCR, jsonwords) and raster images
into the engine's canonical document representation."""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Iterable, Optional

import numpy as np

from .config import DEFAULT_CONFIG, EngineConfig
from .errors import MalformedImage, MalformedInput, UnsupportedFormat

OCR_FORMATS = ("tsv", "hocr", "jsonwords")
RASTER_FORMATS = ("pgm", "png")

# Tesseract TSV column order for --psm word-level output
_TSV_COLUMNS = ("level", "page_num", "block_num", "par_num", "line_num",
                "word_num", "left", "top", "width", "height", "conf", "text")


@dataclass(frozen=True)
class Word:
    """One OCR token with its pixel bounding box (origin top-left)."""

    word_id: int
    text: str
    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), x0 < x1, y0 < y1
    confidence: float = 1.0

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise MalformedInput(f"degenerate bbox {self.bbox} for {self.text!r}")
        if "\n" in self.text:
            raise MalformedInput(f"word text contains newline: {self.text!r}")

    @property
    def height(self) -> int:
        return self.bbox[3] - self.bbox[1]

    @property
    def width(self) -> int:
        return self.bbox[2] - self.bbox[0]


class Raster:
    """Grayscale page image, intensities 0..255, row-major.

    `pixels` is accepted flat or as an (height, width) array.
    """

    def __init__(self, width: int, height: int, pixels):
        arr = np.asarray(pixels, dtype=np.uint8)
        if arr.ndim == 1:
            if arr.size != width * height:
                raise MalformedImage(
                    f"pixel count {arr.size} != {width}x{height}")
            arr = arr.reshape(height, width)
        elif arr.shape != (height, width):
            raise MalformedImage(f"pixel array shape {arr.shape} != ({height}, {width})")
        self.width = width
        self.height = height
        self.pixels = arr

    def __eq__(self, other):
        return (isinstance(other, Raster) and self.width == other.width
                and self.height == other.height
                and np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"Raster({self.width}x{self.height})"


class BinaryRaster:
    """Boolean ink mask; True marks foreground (dark) pixels."""

    def __init__(self, width: int, height: int, ink):
        arr = np.asarray(ink, dtype=bool)
        if arr.ndim == 1:
            arr = arr.reshape(height, width)
        if arr.shape != (height, width):
            raise MalformedImage(f"ink mask shape {arr.shape} != ({height}, {width})")
        self.width = width
        self.height = height
        self.ink = arr

    def ink_count(self) -> int:
        return int(self.ink.sum())

    def __eq__(self, other):
        return (isinstance(other, BinaryRaster) and self.width == other.width
                and self.height == other.height
                and np.array_equal(self.ink, other.ink))

    def __repr__(self):
        return f"BinaryRaster({self.width}x{self.height}, ink={self.ink_count()})"


@dataclass
class RawDocument:
    doc_id: str
    words: list[Word]
    page_size: tuple[int, int]
    raster: Optional[Raster] = None


def _sort_words(records: list[tuple[str, tuple[int, int, int, int], float]]) -> list[Word]:
    """Order by (y0, x0) and assign document-unique ids."""
    records.sort(key=lambda r: (r[1][1], r[1][0], r[1][3], r[1][2], r[0]))
    return [Word(word_id=i, text=t, bbox=b, confidence=c)
            for i, (t, b, c) in enumerate(records)]


def _keep_token(text: str, x0: int, y0: int, x1: int, y1: int, conf: float) -> bool:
    return bool(text.strip()) and x1 > x0 and y1 > y0 and conf > 0.0


def _parse_tsv(payload: bytes) -> list[Word]:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"TSV payload is not UTF-8: {exc}") from exc

    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) == 1:
            # tolerate space-separated rows (hand-written fixtures)
            parts = line.split()
        if parts[0] == "level":  # header row
            continue
        if len(parts) < 11:
            raise MalformedInput(f"TSV line {lineno}: expected 12 columns, got {len(parts)}")
        if len(parts) == 11:
            parts = parts + [""]
        elif len(parts) > 12:
            # token text containing the separator: re-join the tail
            parts = parts[:11] + ["\t".join(parts[11:])]
        try:
            level = int(parts[0])
            left, top, width, height = (int(parts[i]) for i in range(6, 10))
            conf = float(parts[10])
        except ValueError as exc:
            raise MalformedInput(f"TSV line {lineno}: non-numeric field ({exc})") from exc
        if level != 5:
            continue
        token = parts[11].strip()
        x0, y0, x1, y1 = left, top, left + width, top + height
        conf01 = conf / 100.0
        if _keep_token(token, x0, y0, x1, y1, conf01):
            records.append((token, (x0, y0, x1, y1), min(conf01, 1.0)))
    return _sort_words(records)


class _HocrScanner(HTMLParser):
    """Collects text and bbox of every ocrx_word span."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.words: list[tuple[tuple[int, int, int, int], float, list[str]]] = []
        self._depth = 0  # nesting depth inside the current ocrx_word span

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        if self._depth > 0:
            self._depth += 1
            return
        if "ocrx_word" in (attrs.get("class") or "").split():
            title = attrs.get("title") or ""
            m = re.search(r"bbox\s+(\d+)\s+(\d+)\s+(\d+)\s+(\d+)", title)
            if not m:
                raise MalformedInput(f"ocrx_word span without bbox: title={title!r}")
            bbox = tuple(int(g) for g in m.groups())
            c = re.search(r"x_wconf\s+([\d.]+)", title)
            conf = float(c.group(1)) / 100.0 if c else 1.0
            self.words.append((bbox, conf, []))
            self._depth = 1

    def handle_endtag(self, tag):
        if self._depth > 0:
            self._depth -= 1

    def handle_data(self, data):
        if self._depth > 0:
            self.words[-1][2].append(data)


def _parse_hocr(payload: bytes) -> list[Word]:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"hOCR payload is not UTF-8: {exc}") from exc
    scanner = _HocrScanner()
    try:
        scanner.feed(text)
        scanner.close()
    except MalformedInput:
        raise
    except Exception as exc:  # html.parser raises rarely, but be explicit
        raise MalformedInput(f"hOCR markup error: {exc}") from exc

    records = []
    for bbox, conf, chunks in scanner.words:
        token = "".join(chunks).strip()
        x0, y0, x1, y1 = bbox
        if _keep_token(token, x0, y0, x1, y1, conf):
            records.append((token, (x0, y0, x1, y1), min(conf, 1.0)))
    return _sort_words(records)


def _parse_jsonwords(payload: bytes) -> list[Word]:
    try:
        data = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"jsonwords payload does not parse: {exc}") from exc
    if not isinstance(data, list):
        raise MalformedInput("jsonwords payload must be a JSON array")

    records = []
    for i, item in enumerate(data):
        if not isinstance(item, dict):
            raise MalformedInput(f"jsonwords entry {i} is not an object")
        try:
            token = str(item["t"]).strip()
            x0, y0, x1, y1 = (int(item[k]) for k in ("x0", "y0", "x1", "y1"))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"jsonwords entry {i}: {exc}") from exc
        conf = float(item.get("conf", 1.0))
        if _keep_token(token, x0, y0, x1, y1, conf):
            records.append((token, (x0, y0, x1, y1), min(conf, 1.0)))
    return _sort_words(records)


def parse_ocr_words(payload: bytes, format: str) -> list[Word]:
    """Decode OCR output into Words ordered by (y0, x0).

    Tokens with empty text, non-positive box area, or confidence <= 0 are
    dropped silently (Tesseract emits structural rows with conf -1).
    """
    if format == "tsv":
        return _parse_tsv(payload)
    if format == "hocr":
        return _parse_hocr(payload)
    if format == "jsonwords":
        return _parse_jsonwords(payload)
    raise UnsupportedFormat(f"unknown OCR format {format!r}; expected one of {OCR_FORMATS}")


def words_to_jsonwords(words: Iterable[Word]) -> bytes:
    """Serialize words in the native jsonwords format (round-trip safe)."""
    items = [{"t": w.text, "x0": w.bbox[0], "y0": w.bbox[1],
              "x1": w.bbox[2], "y1": w.bbox[3], "conf": w.confidence}
             for w in words]
    return json.dumps(items, ensure_ascii=False, indent=1).encode("utf-8")


# --- rasters ----------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _pgm_tokens(buf: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace/comment-separated header tokens."""
    out = []
    pos = start
    while len(out) < count:
        m = _PGM_TOKEN.match(buf, pos)
        if not m:
            raise MalformedImage("truncated PGM header")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def _parse_pgm(payload: bytes) -> Raster:
    if payload[:2] not in (b"P2", b"P5"):
        raise MalformedImage("not a PGM image (missing P2/P5 magic)")
    binary = payload[:2] == b"P5"
    try:
        (w_tok, h_tok, max_tok), pos = _pgm_tokens(payload, 3, 2)
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise MalformedImage(f"bad PGM header: {exc}") from exc
    if width <= 0 or height <= 0 or not (0 < maxval <= 255):
        raise MalformedImage(f"unsupported PGM dimensions {width}x{height} maxval {maxval}")

    n = width * height
    if binary:
        data = payload[pos + 1: pos + 1 + n]  # single whitespace after maxval
        if len(data) < n:
            raise MalformedImage("truncated PGM pixel data")
        arr = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    else:
        values = payload[pos:].split()
        if len(values) < n:
            raise MalformedImage("truncated PGM pixel data")
        try:
            arr = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError as exc:
            raise MalformedImage(f"bad PGM pixel value: {exc}") from exc
    if arr.max(initial=0) > maxval:
        raise MalformedImage("PGM pixel value exceeds maxval")
    if maxval != 255:
        arr = np.round(arr * 255.0 / maxval).astype(np.int64)
    return Raster(width, height, arr.reshape(height, width))


# ITU-R BT.601 luma weights for color -> gray
_LUMA = np.array([0.299, 0.587, 0.114])


def _parse_png(payload: bytes) -> Raster:
    from PIL import Image, UnidentifiedImageError

    try:
        img = Image.open(io.BytesIO(payload))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedImage(f"not a decodable PNG: {exc}") from exc

    if img.mode in ("1", "I", "I;16", "LA"):
        img = img.convert("L")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)
    else:
        if img.mode != "RGB":
            img = img.convert("RGB")
        rgb = np.asarray(img, dtype=np.float64)
        arr = np.round(rgb @ _LUMA).clip(0, 255).astype(np.uint8)
    h, w = arr.shape
    return Raster(w, h, arr)


def load_raster(payload: bytes, format: str) -> Raster:
    """Decode a PGM (P2/P5) or PNG payload to a grayscale Raster.

    Color images are reduced with BT.601 luma: round(.299R + .587G + .114B).
    """
    if format == "pgm":
        return _parse_pgm(payload)
    if format == "png":
        return _parse_png(payload)
    raise UnsupportedFormat(f"unknown raster format {format!r}; expected one of {RASTER_FORMATS}")


def sniff_raster_format(payload: bytes) -> str:
    if payload[:8] == b"\x89PNG\r\n\x1a\n":
        return "png"
    if payload[:2] in (b"P2", b"P5"):
        return "pgm"
    raise UnsupportedFormat("raster payload is neither PNG nor PGM")


def otsu_threshold(pixels: np.ndarray) -> int:
    """Threshold t maximizing between-class variance of {p < t} vs {p >= t}.

    Smallest maximizing t wins, so a flat image yields t = 0 (no ink).
    """
    hist = np.bincount(pixels.reshape(-1), minlength=256).astype(np.float64)
    total = hist.sum()
    if total == 0:
        return 0
    # cum0[t] = count of pixels < t; csum[t] = intensity sum of pixels < t
    cum0 = np.concatenate(([0.0], np.cumsum(hist)))
    csum = np.concatenate(([0.0], np.cumsum(hist * np.arange(256))))
    w0 = cum0[:256]
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, csum[:256] / w0, 0.0)
        mu1 = np.where(w1 > 0, (csum[256] - csum[:256]) / w1, 0.0)
    variance = w0 * w1 * (mu0 - mu1) ** 2
    return int(np.argmax(variance))


def binarize(raster: Raster, method: str = "otsu", threshold: int | None = None) -> BinaryRaster:
    """Mark as ink every pixel strictly darker than the threshold."""
    if method == "otsu":
        t = otsu_threshold(raster.pixels)
    elif method == "fixed":
        if threshold is None:
            raise UnsupportedFormat("binarize(method='fixed') needs a threshold")
        t = int(threshold)
    else:
        raise UnsupportedFormat(f"unknown binarize method {method!r}")
    return BinaryRaster(raster.width, raster.height, raster.pixels < t)


# --- document assembly -------------------------------------------------------


def ingest_document(ocr_payload: bytes, format: str,
                    raster_payload: bytes | None = None,
                    raster_format: str | None = None,
                    config: EngineConfig = DEFAULT_CONFIG,
                    doc_id: str = "doc") -> RawDocument:
    """Assemble a RawDocument from OCR output plus an optional page image.

    Page size comes from the raster when present, otherwise from the word
    extents plus a 1 px margin. Words falling outside the raster are a
    structural error.
    """
    words = parse_ocr_words(ocr_payload, format)
    raster = None
    if raster_payload is not None:
        fmt = raster_format or sniff_raster_format(raster_payload)
        raster = load_raster(raster_payload, fmt)

    if raster is not None:
        page_size = (raster.width, raster.height)
        for w in words:
            if w.bbox[2] > raster.width or w.bbox[3] > raster.height \
                    or w.bbox[0] < 0 or w.bbox[1] < 0:
                raise MalformedInput(
                    f"word {w.text!r} bbox {w.bbox} outside raster "
                    f"{raster.width}x{raster.height}")
    elif words:
        page_size = (max(w.bbox[2] for w in words) + 1,
                     max(w.bbox[3] for w in words) + 1)
    else:
        page_size = (1, 1)
    return RawDocument(doc_id=doc_id, words=words, page_size=page_size, raster=raster)
