"""Tunable thresholds for entity derivation and box detection."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class EngineConfig:
    # line clustering: max horizontal gap = line_gap_factor * median word height,
    # and joined words must overlap vertically by >= half the smaller height
    line_gap_factor: float = 2.0

    # block clustering: lines chain when their x0 differ by at most
    # block_x_tol px (None -> 0.75 * median line height) and the vertical
    # gap is at most twice the upper line's height
    block_x_tol: float | None = None
    block_x_tol_factor: float = 0.75

    # key-value extraction: max word count allowed before the first colon
    kv_max_key_words: int = 4

    # box detection
    erode_k: int = 3
    fill_min: float = 0.95
    hollow_max: float = 0.30
    min_w: int = 40
    min_h: int = 20

    # box membership: fraction of an entity's bbox area that must fall
    # inside a box for the entity to belong to it
    box_contain_frac: float = 0.8

    # template matching acceptance threshold
    template_tau: float = 0.6
    # template signature grid resolution (grid_n x grid_n cells)
    grid_n: int = 8

    def replace(self, **kw) -> "EngineConfig":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(kw)
        return EngineConfig(**current)


DEFAULT_CONFIG = EngineConfig()
