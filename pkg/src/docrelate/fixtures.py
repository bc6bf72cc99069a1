"""Bundled demo documents and deterministic synthetic generators.

`bank_a` is a compact bank-document layout: the SREEPUR address cluster,
the DRAWEE block, a remit/account block, and the "SWIFT: SCBLUS33"
key-value line. `bank_b` is a same-template sibling with different
variable values; `invoice_c` is an off-template document.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import Raster, Word, words_to_jsonwords

_FIXTURE_DIR = Path(__file__).parent / "data" / "fixtures"

# (text, x0, y0, x1, y1)
BANK_A_WORDS = (
    ("SWIFT:",     100, 40, 160, 52),
    ("SCBLUS33",   168, 40, 240, 52),
    ("COMPOSITE",  400, 80, 520, 95),
    ("GILARCHALA", 260, 100, 380, 115),
    ("SREEPUR",    400, 100, 480, 115),
    ("BANGLADESH", 400, 120, 520, 135),
    ("DRAWEE",     100, 200, 160, 212),
    ("ABCD",       100, 216, 150, 228),
    ("PRIVATE",    158, 216, 230, 228),
    ("LIMITED",    238, 216, 300, 228),
    ("Please",     100, 300, 140, 312),
    ("remit",      146, 300, 186, 312),
    ("payment",    192, 300, 260, 312),
    ("to",         266, 300, 282, 312),
    ("Account",    100, 318, 160, 330),
    ("No:",        166, 318, 190, 330),
    ("123456",     196, 318, 250, 330),
)

# same template: static words and layout kept, variable values swapped,
# a couple of boxes nudged to stand in for scan noise
BANK_B_WORDS = (
    ("SWIFT:",     101, 41, 161, 53),
    ("DEUTDEFF",   169, 41, 239, 53),
    ("COMPOSITE",  400, 80, 520, 95),
    ("GILARCHALA", 260, 100, 380, 115),
    ("SREEPUR",    401, 101, 481, 116),
    ("BANGLADESH", 400, 120, 520, 135),
    ("DRAWEE",     100, 200, 160, 212),
    ("ABCD",       100, 216, 150, 228),
    ("PRIVATE",    158, 216, 230, 228),
    ("LIMITED",    239, 217, 301, 229),
    ("Please",     100, 300, 140, 312),
    ("remit",      146, 300, 186, 312),
    ("payment",    192, 300, 260, 312),
    ("to",         266, 300, 282, 312),
    ("Account",    100, 318, 160, 330),
    ("No:",        166, 318, 190, 330),
    ("789001",     196, 318, 250, 330),
)

# off-template: invoice layout, no "remit" anchor anywhere
INVOICE_C_WORDS = (
    ("INVOICE",   300, 40, 420, 60),
    ("Brightway", 100, 90, 200, 105),
    ("Supplies",  206, 90, 280, 105),
    ("Item",      100, 140, 140, 152),
    ("Qty",       300, 140, 330, 152),
    ("Price",     400, 140, 440, 152),
    ("Widget",    100, 160, 150, 172),
    ("4",         300, 160, 310, 172),
    ("15.00",     400, 160, 440, 172),
    ("Gadget",    100, 178, 152, 190),
    ("2",         300, 178, 310, 190),
    ("40.00",     400, 178, 440, 190),
    ("Total:",    300, 220, 350, 232),
    ("140.00",    356, 220, 410, 232),
)

FIXTURE_WORDS = {
    "bank_a": BANK_A_WORDS,
    "bank_b": BANK_B_WORDS,
    "invoice_c": INVOICE_C_WORDS,
}

# annotated ground truth used by the end-to-end tests
BANK_A_ACCOUNT_VALUE = "123456"
BANK_B_ACCOUNT_VALUE = "789001"
ACCOUNT_QUERY_SEQUENCE = (
    "Kindly get the block information for the block containing the word remit",
    "Please get the line which has word Account in it from the previous result",
    "Get substring which is towards right of Account from the previous result",
)


def fixture_words(name: str) -> list[Word]:
    rows = FIXTURE_WORDS[name]
    ordered = sorted(rows, key=lambda r: (r[2], r[1]))
    return [Word(word_id=i, text=t, bbox=(x0, y0, x1, y1))
            for i, (t, x0, y0, x1, y1) in enumerate(ordered)]


def fixture_jsonwords(name: str) -> bytes:
    return words_to_jsonwords(fixture_words(name))


def fixture_path(name: str) -> Path:
    """Path of the bundled jsonwords file for a fixture."""
    return _FIXTURE_DIR / f"{name}.json"


def write_fixture_files(directory: str | Path) -> list[Path]:
    """Regenerate the bundled fixture files (used at packaging time)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name in FIXTURE_WORDS:
        path = directory / f"{name}.json"
        path.write_bytes(fixture_jsonwords(name))
        out.append(path)
    return out


# --- synthetic raster pages ------------------------------------------------------


def draw_rect_outline(page: np.ndarray, x0: int, y0: int, x1: int, y1: int,
                      stroke: int = 2, value: int = 0) -> None:
    page[y0:y1, x0:x0 + stroke] = value
    page[y0:y1, x1 - stroke:x1] = value
    page[y0:y0 + stroke, x0:x1] = value
    page[y1 - stroke:y1, x0:x1] = value


def _boxes_overlap(a, b, margin: int) -> bool:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    return not (ax1 + margin <= bx0 or bx1 + margin <= ax0
                or ay1 + margin <= by0 or by1 + margin <= ay0)


def gen_box_page(rng: np.random.Generator, width: int = 800, height: int = 600,
                 n_rects: int | None = None,
                 n_glyphs: int = 40) -> tuple[Raster, list[tuple[int, int, int, int]]]:
    """A white page with rectangle outlines plus scattered glyph blobs.

    Returns the raster and the drawn rectangles (the detection oracle).
    Rectangles keep enough separation that morphology cannot merge them,
    and their proportions keep the stroke-to-bbox ratio clearly hollow.
    """
    page = np.full((height, width), 255, dtype=np.uint8)
    n = int(n_rects) if n_rects is not None else int(rng.integers(1, 5))
    rects: list[tuple[int, int, int, int]] = []
    attempts = 0
    while len(rects) < n and attempts < 500:
        attempts += 1
        w = int(rng.integers(100, 400))
        h = int(rng.integers(50, 200))
        if w + 40 >= width or h + 40 >= height:
            continue
        x0 = int(rng.integers(20, width - w - 20))
        y0 = int(rng.integers(20, height - h - 20))
        cand = (x0, y0, x0 + w, y0 + h)
        if any(_boxes_overlap(cand, r, margin=12) for r in rects):
            continue
        rects.append(cand)
    for (x0, y0, x1, y1) in rects:
        draw_rect_outline(page, x0, y0, x1, y1, stroke=2)

    placed: list[tuple[int, int, int, int]] = []
    tries = 0
    while len(placed) < n_glyphs and tries < 2000:
        tries += 1
        gw = int(rng.integers(2, 9))
        gh = int(rng.integers(2, 9))
        gx = int(rng.integers(2, width - gw - 2))
        gy = int(rng.integers(2, height - gh - 2))
        cand = (gx, gy, gx + gw, gy + gh)
        if any(_boxes_overlap(cand, r, margin=6) for r in rects):
            continue
        if any(_boxes_overlap(cand, g, margin=6) for g in placed):
            continue
        page[gy:gy + gh, gx:gx + gw] = 0
        placed.append(cand)
    return Raster(width, height, page), rects


# --- synthetic template suite ------------------------------------------------------

_LABEL_POOL = (
    "INVOICE", "STATEMENT", "ACCOUNT", "TOTAL", "CUSTOMER", "REFERENCE",
    "BALANCE", "PAYMENT", "DUE", "TAX", "SUBTOTAL", "SHIPPING", "BILLING",
    "BRANCH", "CODE", "PERIOD", "CONTACT", "ADDRESS", "TERMS", "RATE",
    "UNITS", "DESCRIPTION", "ORDER", "RECEIPT", "VOUCHER", "LEDGER",
    "CREDIT", "DEBIT", "SUMMARY", "REMARKS",
)


def _variable_value(rng: np.random.Generator, kind: int) -> str:
    if kind == 0:
        day = int(rng.integers(1, 29))
        month = int(rng.integers(1, 13))
        return f"{day:02d}/{month:02d}/{2020 + int(rng.integers(0, 6))}"
    if kind == 1:
        return f"{int(rng.integers(1, 999))},{int(rng.integers(0, 999)):03d}.{int(rng.integers(0, 99)):02d}"
    return f"{int(rng.integers(10 ** 5, 10 ** 6))}"


def gen_template_doc(template_idx: int, rng: np.random.Generator,
                     jitter: int = 0) -> list[Word]:
    """Words of one synthetic template instance.

    Static labels and positions depend only on template_idx; jitter moves
    every box by up to +-jitter px and variable field values are redrawn,
    so instances of one template share vocabulary and rough layout.
    """
    layout_rng = np.random.default_rng(9000 + template_idx)
    labels = list(layout_rng.choice(len(_LABEL_POOL), size=10, replace=False))
    n_cols = 1 + template_idx % 3
    col_w = 700 // n_cols
    rows = []
    for i, label_idx in enumerate(labels):
        col = i % n_cols
        row = i // n_cols
        x0 = 60 + col * col_w + int(layout_rng.integers(0, 40))
        y0 = 60 + row * (40 + 6 * (template_idx % 4)) + int(layout_rng.integers(0, 8))
        label = _LABEL_POOL[label_idx]
        rows.append((label, x0, y0, x0 + 9 * len(label), y0 + 14, i))
    words = []
    wid = 0
    for (label, x0, y0, x1, y1, i) in rows:
        jx = int(rng.integers(-jitter, jitter + 1)) if jitter else 0
        jy = int(rng.integers(-jitter, jitter + 1)) if jitter else 0
        words.append(Word(word_id=wid, text=label,
                          bbox=(x0 + jx, y0 + jy, x1 + jx, y1 + jy)))
        wid += 1
        value = _variable_value(rng, kind=i % 3)
        vx0 = x1 + 12 + jx
        words.append(Word(word_id=wid, text=value,
                          bbox=(vx0, y0 + jy, vx0 + 8 * len(value), y1 + jy)))
        wid += 1
    return words
