"""Immersion watershed (Vincent & Soille, 1991) and its input reliefs.

Cells are flooded level by level from the regional minima.  Within a level,
labels spread breadth-first from already-labelled cells; a cell reached by
two different basins becomes a watershed cell (label 0).  Cells of the
level that remain unreached form new minima and open new basins.

Unlike the swarm, the relief is not toroidal: segmentation respects the
image border.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .habitat import GrayImage, write_pgm
from .swarm import PheromoneField

WSHED = 0
_INIT = -1
_MASK = -2
_FICTITIOUS = -1

_OFFSETS = {
    4: ((0, -1), (-1, 0), (1, 0), (0, 1)),
    8: ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)),
}


@dataclass(frozen=True, eq=False)
class ReliefImage:
    """Integer levels in [0, 255]; high = ridge, low = basin interior."""

    levels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.levels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"relief must be a non-empty 2-D array, got shape {arr.shape}")
        if np.any(arr < 0) or np.any(arr > 255):
            raise ValueError("relief levels must lie in [0, 255]")
        arr = arr.astype(np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "levels", arr)

    @property
    def width(self) -> int:
        return self.levels.shape[1]

    @property
    def height(self) -> int:
        return self.levels.shape[0]


@dataclass(frozen=True, eq=False)
class LabelMap:
    labels: np.ndarray  # 0 = watershed line, 1..basin_count = basins
    basin_count: int

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def boundary(self, connectivity: int = 4) -> np.ndarray:
        """Mask of watershed cells plus cells touching a different basin."""
        lab = self.labels
        h, w = lab.shape
        padded = np.pad(lab, 1, mode="edge")
        out = lab == WSHED
        for dx, dy in _OFFSETS[connectivity]:
            out |= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] != lab
        return out


def morphological_gradient(img: GrayImage) -> ReliefImage:
    """3x3 max minus 3x3 min, replicating the border instead of wrapping."""
    padded = np.pad(img.pixels.astype(np.int16), 1, mode="edge")
    h, w = img.shape
    windows = np.stack([padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3)])
    return ReliefImage(windows.max(axis=0) - windows.min(axis=0))


def pheromone_relief(field: PheromoneField) -> ReliefImage:
    """Scale the field linearly so its maximum maps to 255."""
    top = field.sigma.max()
    if top <= 0:
        return ReliefImage(np.zeros_like(field.sigma, dtype=np.uint8))
    return ReliefImage(np.round(255.0 * field.sigma / top))


def _neighbor_lists(h: int, w: int, connectivity: int) -> list[list[int]]:
    offsets = _OFFSETS[connectivity]
    nbrs = []
    for y in range(h):
        for x in range(w):
            nbrs.append([(y + dy) * w + x + dx for dx, dy in offsets
                         if 0 <= x + dx < w and 0 <= y + dy < h])
    return nbrs


def watershed_immersion(relief: ReliefImage, connectivity: int = 8) -> LabelMap:
    if connectivity not in _OFFSETS:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    h, w = relief.levels.shape
    flat = relief.levels.ravel()
    nbrs = _neighbor_lists(h, w, connectivity)
    order = np.argsort(flat, kind="stable").tolist()
    sorted_levels = flat[order]
    # start index of each level run in ``order``
    cuts = np.flatnonzero(np.diff(sorted_levels)) + 1
    bounds = [0, *cuts.tolist(), len(order)]

    lab = [_INIT] * flat.size
    dist = [0] * flat.size
    fifo: deque[int] = deque()
    current = 0

    for start, stop in zip(bounds[:-1], bounds[1:]):
        group = order[start:stop]
        for p in group:
            lab[p] = _MASK
            if any(lab[q] >= WSHED for q in nbrs[p]):
                dist[p] = 1
                fifo.append(p)

        curdist = 1
        fifo.append(_FICTITIOUS)
        while True:
            p = fifo.popleft()
            if p == _FICTITIOUS:
                if not fifo:
                    break
                fifo.append(_FICTITIOUS)
                curdist += 1
                p = fifo.popleft()
            # a cell first marked WSHED by a watershed neighbor may still join a basin
            wshed_from_neighbor = False
            for q in nbrs[p]:
                if dist[q] < curdist and lab[q] >= WSHED:
                    if lab[q] > 0:
                        if lab[p] == _MASK or (lab[p] == WSHED and wshed_from_neighbor):
                            lab[p] = lab[q]
                        elif lab[p] > 0 and lab[p] != lab[q]:
                            lab[p] = WSHED
                            wshed_from_neighbor = False
                    elif lab[p] == _MASK:
                        lab[p] = WSHED
                        wshed_from_neighbor = True
                elif lab[q] == _MASK and dist[q] == 0:
                    dist[q] = curdist + 1
                    fifo.append(q)

        for p in group:
            dist[p] = 0
            if lab[p] == _MASK:
                current += 1
                lab[p] = current
                fifo.append(p)
                while fifo:
                    q = fifo.popleft()
                    for r in nbrs[q]:
                        if lab[r] == _MASK:
                            lab[r] = current
                            fifo.append(r)

    return LabelMap(np.array(lab, dtype=np.int64).reshape(h, w), current)


def segment(img: GrayImage, source: str = "classical", field: PheromoneField | None = None,
            connectivity: int = 8) -> LabelMap:
    """Watershed of the image's gradient (``classical``) or of a pheromone map."""
    if source == "classical":
        relief = morphological_gradient(img)
    elif source == "pheromone":
        if field is None:
            raise ValueError("pheromone segmentation needs a pheromone field")
        if (field.width, field.height) != (img.width, img.height):
            raise ValueError(f"field is {field.width}x{field.height} but image is "
                             f"{img.width}x{img.height}")
        relief = pheromone_relief(field)
    else:
        raise ValueError(f"source must be 'classical' or 'pheromone', got {source!r}")
    return watershed_immersion(relief, connectivity)


def label_image(labels: LabelMap) -> GrayImage:
    """Render basins as scattered gray levels in [0, 254]; watershed cells are 255."""
    gray = (labels.labels * 97) % 255
    gray[labels.labels == WSHED] = 255
    return GrayImage(gray.astype(np.uint8))


def write_label_pgm(path, labels: LabelMap) -> None:
    write_pgm(path, label_image(labels))


def write_label_csv(path, labels: LabelMap) -> None:
    ys, xs = np.indices(labels.labels.shape)
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "y", "label"])
        out.writerows(zip(xs.ravel().tolist(), ys.ravel().tolist(), labels.labels.ravel().tolist()))
