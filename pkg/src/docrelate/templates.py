"""Deterministic document-to-template assignment.

A template signature couples the document's static vocabulary (words not
tagged with a variable data type) with an 8x8 layout histogram of word-box
area. Matching scores half on vocabulary Jaccard overlap and half on grid
L1 closeness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .entities import DocumentEntities, word_match_text
from .errors import DuplicateName
from .ingest import RawDocument


@dataclass(frozen=True)
class TemplateSignature:
    signature_id: str
    vocab: frozenset[str]
    grid: np.ndarray  # (grid_n, grid_n), non-negative, sums to 1 when non-empty

    def __eq__(self, other):
        return (isinstance(other, TemplateSignature)
                and self.signature_id == other.signature_id
                and self.vocab == other.vocab
                and np.allclose(self.grid, other.grid))


def compute_signature(doc: RawDocument, entities: DocumentEntities,
                      grid_n: int = 8, signature_id: str = "") -> TemplateSignature:
    """Fingerprint a document by static vocabulary plus layout density.

    Words carrying a data type (dates, amounts, codes, place names) are
    variable content and excluded from the vocabulary. The grid cell
    values are word-box areas intersected with each cell, normalized to
    sum to 1 (an empty document keeps an all-zero grid).
    """
    type_by_id = {t.word_id: t.data_type for t in entities.typed_words}
    vocab = frozenset(
        word_match_text(w.text).lower()
        for w in doc.words
        if type_by_id.get(w.word_id, "NONE") == "NONE")

    grid = np.zeros((grid_n, grid_n), dtype=np.float64)
    page_w, page_h = doc.page_size
    if page_w > 0 and page_h > 0:
        cell_w = page_w / grid_n
        cell_h = page_h / grid_n
        for w in doc.words:
            x0, y0, x1, y1 = w.bbox
            ci0 = max(int(x0 // cell_w), 0)
            ci1 = min(int(np.ceil(x1 / cell_w)), grid_n)
            rj0 = max(int(y0 // cell_h), 0)
            rj1 = min(int(np.ceil(y1 / cell_h)), grid_n)
            for r in range(rj0, rj1):
                for c in range(ci0, ci1):
                    ix = min(x1, (c + 1) * cell_w) - max(x0, c * cell_w)
                    iy = min(y1, (r + 1) * cell_h) - max(y0, r * cell_h)
                    if ix > 0 and iy > 0:
                        grid[r, c] += ix * iy
    total = grid.sum()
    if total > 0:
        grid /= total
    grid.setflags(write=False)
    return TemplateSignature(signature_id=signature_id, vocab=vocab, grid=grid)


def signature_score(a: TemplateSignature, b: TemplateSignature) -> float:
    """Symmetric similarity in [0, 1]: vocabulary Jaccard and grid L1."""
    union = a.vocab | b.vocab
    if union:
        jaccard = len(a.vocab & b.vocab) / len(union)
    else:
        jaccard = 1.0
    l1 = float(np.abs(a.grid - b.grid).sum())
    return 0.5 * jaccard + 0.5 * (1.0 - l1 / 2.0)


class TemplateRegistry:
    """Ordered registry of template signatures, optionally file-backed."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else None
        self._signatures: list[TemplateSignature] = []
        if self.directory and self.directory.exists():
            for path in sorted(self.directory.glob("*.sig")):
                self._signatures.append(load_signature_file(path))

    def names(self) -> list[str]:
        return [s.signature_id for s in self._signatures]

    def get_optional(self, name: str) -> Optional[TemplateSignature]:
        for sig in self._signatures:
            if sig.signature_id == name:
                return sig
        return None

    def register(self, signature: TemplateSignature) -> str:
        if self.get_optional(signature.signature_id) is not None:
            raise DuplicateName(
                f"template {signature.signature_id!r} already registered")
        self._signatures.append(signature)
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
            save_signature_file(signature, self._path_for(signature.signature_id))
        return signature.signature_id

    def signatures(self) -> list[TemplateSignature]:
        return list(self._signatures)

    def _path_for(self, name: str) -> Path:
        safe = re.sub(r"[^\w.-]", "_", name)
        return self.directory / f"{safe}.sig"


def match_template(sig: TemplateSignature, registry: TemplateRegistry,
                   tau: float = 0.6) -> tuple[str, float]:
    """Best-scoring registered template, or ("unknown", best score).

    Ties break in registration order; an empty registry scores 0.
    """
    best_id = "unknown"
    best_score = 0.0
    for candidate in registry.signatures():
        score = signature_score(sig, candidate)
        if score > best_score:
            best_id, best_score = candidate.signature_id, score
    if best_score < tau:
        return "unknown", best_score
    return best_id, best_score


def register_template(name: str, doc: RawDocument, entities: DocumentEntities,
                      registry: TemplateRegistry, grid_n: int = 8) -> str:
    sig = compute_signature(doc, entities, grid_n=grid_n, signature_id=name)
    return registry.register(sig)


def save_signature_file(sig: TemplateSignature, path: str | Path) -> None:
    lines = [sig.signature_id,
             " ".join(f"{v:.12g}" for v in sig.grid.reshape(-1))]
    lines.extend(sorted(sig.vocab))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_signature_file(path: str | Path) -> TemplateSignature:
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    name = raw[0]
    values = np.array([float(v) for v in raw[1].split()], dtype=np.float64)
    n = int(round(len(values) ** 0.5))
    grid = values.reshape(n, n)
    grid.setflags(write=False)
    vocab = frozenset(line for line in raw[2:] if line)
    return TemplateSignature(signature_id=name, vocab=vocab, grid=grid)
