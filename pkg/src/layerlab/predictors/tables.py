"""Geometric table parsing: cross-reference cell geometry with extracted text.

Geometry arrives as crop-relative row/column bands or explicit cells; words
from the document's words layer are assigned to cells by overlap and read
out as a header-keyed table record.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from layerlab.errors import DegenerateGeometryError, EmptyGridError, NoGeometryError
from layerlab.predictors.base import ImageOutput, ImagePredictor
from layerlab.predictors.runners import enclosing_crop_box

# a word joins a cell only if at least half its area overlaps it
OVERLAP_THRESHOLD = 0.5


class Rect(NamedTuple):
    """Crop-relative rectangle; no page binding."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    def intersection_area(self, other: "Rect") -> float:
        iw = min(self.x + self.w, other.x + other.w) - max(self.x, other.x)
        ih = min(self.y + self.h, other.y + other.h) - max(self.y, other.y)
        return iw * ih if iw > 0 and ih > 0 else 0.0


@dataclass(frozen=True)
class CropWord:
    text: str
    rect: Rect


@dataclass
class TableGeometry:
    """Either row and column bands, or explicit (row, col)-indexed cells."""

    row_boxes: list[Rect] | None = None
    column_boxes: list[Rect] | None = None
    cell_boxes: list[tuple[int, int, Rect]] | None = None

    def __post_init__(self):
        if self.cell_boxes is not None:
            if not self.cell_boxes:
                raise ValueError("geometry needs at least one cell")
            seen = set()
            for row, col, _ in self.cell_boxes:
                if (row, col) in seen:
                    raise ValueError(f"duplicate cell index ({row}, {col})")
                seen.add((row, col))
        elif self.row_boxes and self.column_boxes:
            self.row_boxes = sorted(self.row_boxes, key=lambda r: r.y)
            self.column_boxes = sorted(self.column_boxes, key=lambda r: r.x)
        else:
            raise ValueError("geometry needs rows+columns or explicit cells")

    def cells(self) -> list[tuple[int, int, Rect]]:
        if self.cell_boxes is not None:
            return sorted(self.cell_boxes, key=lambda c: (c[0], c[1]))
        out = []
        for r, row in enumerate(self.row_boxes):
            for c, col in enumerate(self.column_boxes):
                x = max(row.x, col.x)
                y = max(row.y, col.y)
                x1 = min(row.x + row.w, col.x + col.w)
                y1 = min(row.y + row.h, col.y + col.h)
                out.append((r, c, Rect(x, y, x1 - x, y1 - y)))
        return out

    def shape(self) -> tuple[int, int]:
        cells = self.cells()
        rows = max(c[0] for c in cells) + 1
        cols = max(c[1] for c in cells) + 1
        return rows, cols


@dataclass
class CellAssignment:
    grid: list[list[str]]
    unassigned: list[str]


def assign_words_to_cells(geometry: TableGeometry, words: list[CropWord]) -> CellAssignment:
    """Assign each word to the cell maximizing overlap/word-area (>= 0.5).

    Ties prefer the lower row index, then the lower column index. Cell text
    joins its words in reading order with single spaces.
    """
    cells = geometry.cells()
    for _, _, rect in cells:
        if rect.area <= 0:
            raise DegenerateGeometryError("geometry produces zero-area cells")
    rows, cols = geometry.shape()
    buckets: dict[tuple[int, int], list[CropWord]] = {}
    unassigned: list[CropWord] = []
    for word in words:
        if word.rect.area <= 0:
            unassigned.append(word)
            continue
        best_key = None
        best_ratio = 0.0
        for row, col, rect in cells:  # (row, col) order makes ties pick lower indices
            ratio = rect.intersection_area(word.rect) / word.rect.area
            if ratio > best_ratio + 1e-12:
                best_ratio = ratio
                best_key = (row, col)
        if best_key is not None and best_ratio >= OVERLAP_THRESHOLD:
            buckets.setdefault(best_key, []).append(word)
        else:
            unassigned.append(word)
    grid = [["" for _ in range(cols)] for _ in range(rows)]
    for (row, col), members in buckets.items():
        ordered = sorted(members, key=lambda w: (w.rect.y + w.rect.h / 2, w.rect.x))
        grid[row][col] = " ".join(w.text for w in ordered)
    ordered_rest = sorted(unassigned, key=lambda w: (w.rect.y + w.rect.h / 2, w.rect.x))
    return CellAssignment(grid, [w.text for w in ordered_rest])


def grid_to_table_record(grid: list[list[str]]) -> dict[str, list[str]]:
    """First row becomes the header; duplicate and empty names are
    disambiguated deterministically."""
    if not grid or not grid[0]:
        raise EmptyGridError("grid has no header row")
    names: list[str] = []
    used: set[str] = set()
    for j, raw in enumerate(grid[0]):
        name = raw.strip() or f"col_{j + 1}"
        if name in used:
            k = 2
            while f"{name}_{k}" in used:
                k += 1
            name = f"{name}_{k}"
        used.add(name)
        names.append(name)
    record: dict[str, list[str]] = {name: [] for name in names}
    for row in grid[1:]:
        for name, value in zip(names, row):
            record[name].append(value)
    return record


class GeometricTableParser(ImagePredictor):
    """Parses table regions by cross-referencing geometry with PDF words.

    Geometry precedence: entity metadata hints (populated by table detection
    or a region-hint sidecar), then a remote detection service.
    """

    name = "geometric_table"

    def __init__(self, detection_service_url: str | None = None, timeout_s: int = 60):
        self.detection_service_url = detection_service_url
        self.timeout_s = timeout_s

    def process_entity(self, doc, entity, renderer) -> ImageOutput:
        crop = enclosing_crop_box(entity)
        geometry = self._geometry_from_metadata(entity, crop)
        if geometry is None and self.detection_service_url:
            geometry = self._geometry_from_service(renderer, crop)
        if geometry is None:
            raise NoGeometryError(
                "no table geometry: provide detection hints via the pipeline, "
                "a region-hint sidecar, or configure a detection service"
            )
        words = self._crop_words(doc, crop)
        assignment = assign_words_to_cells(geometry, words)
        record = grid_to_table_record(assignment.grid)
        boxes = [
            (rect.x, rect.y, rect.w, rect.h, f"cell {row},{col}", 1.0)
            for row, col, rect in geometry.cells()
        ]
        return ImageOutput(table=record, boxes=boxes)

    @staticmethod
    def _geometry_from_metadata(entity, crop) -> TableGeometry | None:
        hints = entity.metadata.get("geometry")
        if not isinstance(hints, dict):
            return None
        if "cells" in hints:
            cells = [
                (int(r), int(c),
                 Rect((x - crop.x) / crop.w, (y - crop.y) / crop.h,
                      w / crop.w, h / crop.h))
                for r, c, x, y, w, h in hints["cells"]
            ]
            return TableGeometry(cell_boxes=cells)
        rows = hints.get("rows")
        columns = hints.get("columns")
        if not rows or not columns:
            return None
        row_boxes = [
            Rect(0.0, (y - crop.y) / crop.h, 1.0, h / crop.h) for y, h in rows
        ]
        column_boxes = [
            Rect((x - crop.x) / crop.w, 0.0, w / crop.w, 1.0) for x, w in columns
        ]
        return TableGeometry(row_boxes=row_boxes, column_boxes=column_boxes)

    def _geometry_from_service(self, renderer, crop) -> TableGeometry | None:
        from layerlab.predictors.remote_image import post_image

        output = post_image(
            self.detection_service_url, renderer.crop(crop), self.timeout_s
        )
        if not output.boxes:
            return None
        rows = [Rect(x, y, w, h) for x, y, w, h, label, _ in output.boxes
                if label.lower().startswith("row")]
        cols = [Rect(x, y, w, h) for x, y, w, h, label, _ in output.boxes
                if label.lower().startswith("col")]
        cells = [b for b in output.boxes if b[4].lower().startswith("cell")]
        if cells:
            indexed = []
            for i, (x, y, w, h, label, _) in enumerate(cells):
                parts = label.replace("cell", "").replace("(", " ").replace(")", " ")
                try:
                    r, c = (int(p) for p in parts.replace(",", " ").split())
                except ValueError:
                    return None
                indexed.append((r, c, Rect(x, y, w, h)))
            return TableGeometry(cell_boxes=indexed)
        if rows and cols:
            return TableGeometry(row_boxes=rows, column_boxes=cols)
        return None

    @staticmethod
    def _crop_words(doc, crop) -> list[CropWord]:
        words = []
        for word in doc.layer("words").entities:
            box = word.boxes[0]
            if box.page != crop.page:
                continue
            cx = box.x + box.w / 2
            cy = box.y + box.h / 2
            if not crop.contains(cx, cy):
                continue
            words.append(
                CropWord(
                    doc.text_of(word),
                    Rect((box.x - crop.x) / crop.w, (box.y - crop.y) / crop.h,
                         box.w / crop.w, box.h / crop.h),
                )
            )
        return words
