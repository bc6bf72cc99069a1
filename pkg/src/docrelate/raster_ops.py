"""Binary-image morphology and connected-component analysis, used to find
ruled rectangular box regions on a page."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .config import DEFAULT_CONFIG, EngineConfig
from .errors import BadKernel, NoRaster
from .ingest import BinaryRaster, Raster, binarize

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class ConnectedComponent:
    """Maximal set of mutually connected ink pixels.

    `filled_area` counts, inside the bbox, every pixel not reachable by the
    background flood from outside the component (the component's own area
    plus its enclosed holes).
    """

    pixels: frozenset[tuple[int, int]]  # (x, y)
    bbox: tuple[int, int, int, int]     # (x0, y0, x1, y1), exclusive right/bottom
    area: int
    filled_area: int

    @property
    def bbox_area(self) -> int:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) * (y1 - y0)


@dataclass(frozen=True)
class BoxRegion:
    box_id: int
    bbox: tuple[int, int, int, int]


def _check_kernel(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise BadKernel(f"kernel size must be an odd integer >= 1, got {k!r}")
    return int(k)


def erode(b: BinaryRaster, k: int) -> BinaryRaster:
    """Keep a pixel as ink iff every pixel of its k x k window is ink.

    Positions outside the image count as background, so a solid 5x5 block
    erodes to its 3x3 center under k=3 and ink touching the border is
    always stripped.
    """
    k = _check_kernel(k)
    if k == 1:
        return BinaryRaster(b.width, b.height, b.ink.copy())
    out = ndimage.binary_erosion(b.ink, structure=np.ones((k, k), dtype=bool),
                                 border_value=0)
    return BinaryRaster(b.width, b.height, out)


def dilate(b: BinaryRaster, k: int) -> BinaryRaster:
    """Mark a pixel as ink iff any pixel of its k x k window is ink."""
    k = _check_kernel(k)
    if k == 1:
        return BinaryRaster(b.width, b.height, b.ink.copy())
    out = ndimage.binary_dilation(b.ink, structure=np.ones((k, k), dtype=bool))
    return BinaryRaster(b.width, b.height, out)


def connected_components(b: BinaryRaster, connectivity: int = 8) -> list[ConnectedComponent]:
    """Partition the ink pixels into maximal connected sets.

    Components are ordered by (bbox.y0, bbox.x0). Hole filling uses the
    dual connectivity of the component connectivity, so the background of
    an 8-connected component is flooded 4-connected (and vice versa).
    """
    if connectivity not in (4, 8):
        raise BadKernel(f"connectivity must be 4 or 8, got {connectivity!r}")
    comp_struct = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    fill_struct = _STRUCT_8 if connectivity == 4 else _STRUCT_4

    labels, n = ndimage.label(b.ink, structure=comp_struct)
    if n == 0:
        return []

    comps = []
    for lab, slc in enumerate(ndimage.find_objects(labels), start=1):
        if slc is None:
            continue
        ys, xs = slc
        local = labels[slc] == lab
        area = int(local.sum())
        filled = ndimage.binary_fill_holes(local, structure=fill_struct)
        filled_area = int(filled.sum())
        py, px = np.nonzero(local)
        pixels = frozenset(zip((px + xs.start).tolist(), (py + ys.start).tolist()))
        comps.append(ConnectedComponent(
            pixels=pixels,
            bbox=(xs.start, ys.start, xs.stop, ys.stop),
            area=area,
            filled_area=filled_area,
        ))
    comps.sort(key=lambda c: (c.bbox[1], c.bbox[0], c.bbox[3], c.bbox[2]))
    return comps


def detect_boxes(raster: Raster | None, cfg: EngineConfig = DEFAULT_CONFIG) -> list[BoxRegion]:
    """Find ruled rectangular outlines drawn on the page.

    Pipeline: Otsu binarization (ink = dark), k x k ink thickening (the
    classical erode-the-grayscale step: eroding a dark-on-light image
    dilates its dark strokes), then 8-connected components. A component is
    reported as a box iff its filled hull nearly covers its bbox
    (filled_area / bbox_area >= fill_min) while the stroke itself is sparse
    (area / bbox_area <= hollow_max) and the bbox is at least min_w x min_h.
    Nested boxes are all reported.
    """
    if raster is None:
        raise NoRaster("box detection needs a page raster")
    ink = binarize(raster, "otsu")
    thick = dilate(ink, cfg.erode_k)
    boxes = []
    for comp in connected_components(thick, connectivity=8):
        x0, y0, x1, y1 = comp.bbox
        bbox_area = comp.bbox_area
        if bbox_area == 0:
            continue
        if (comp.filled_area / bbox_area >= cfg.fill_min
                and comp.area / bbox_area <= cfg.hollow_max
                and (x1 - x0) >= cfg.min_w and (y1 - y0) >= cfg.min_h):
            boxes.append(BoxRegion(box_id=len(boxes), bbox=comp.bbox))
    return boxes
