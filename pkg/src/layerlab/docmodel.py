"""Layered document representation: spans, boxes, entities, layers, documents.

All character offsets index into a single canonical `symbols` string and are
half-open. Boxes are normalized to page width/height with origin at the
top-left corner (y grows downward).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from layerlab.errors import (
    DuplicateLayerError,
    EntityOutOfBoundsError,
    LocalSpanOutOfRangeError,
    MalformedInputError,
    MissingLayerError,
    MultiSpanParentError,
    SchemaVersionError,
)

SCHEMA_VERSION = "1.0"

# slack on box bounds to absorb floating-point extraction noise
BOX_EPS = 1e-6

_LAYER_NAME_RE = re.compile(r"^[a-z0-9_]+$")


@dataclass(frozen=True)
class Span:
    """Half-open character interval [start, end) into document symbols."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Box:
    """Normalized page-anchored rectangle; origin top-left, y increases downward."""

    page: int
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.page < 0:
            raise ValueError(f"negative page index {self.page}")
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"box origin ({self.x}, {self.y}) outside [0,1]")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"non-positive box extent ({self.w}, {self.h})")
        if self.x + self.w > 1.0 + BOX_EPS or self.y + self.h > 1.0 + BOX_EPS:
            raise ValueError("box extends past page edge")

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains(self, x: float, y: float) -> bool:
        return self.x <= x <= self.x + self.w and self.y <= y <= self.y + self.h

    @staticmethod
    def enclosing(boxes: "list[Box]") -> "Box":
        """Minimal box covering all given boxes; they must share a page."""
        pages = {b.page for b in boxes}
        if len(pages) != 1:
            raise ValueError("enclosing box requires boxes on a single page")
        x0 = min(b.x for b in boxes)
        y0 = min(b.y for b in boxes)
        x1 = max(b.x + b.w for b in boxes)
        y1 = max(b.y + b.h for b in boxes)
        return Box(boxes[0].page, x0, y0, x1 - x0, y1 - y0)


@dataclass
class Entity:
    """A document region: character spans and/or page boxes plus metadata."""

    id: int
    spans: list[Span] = field(default_factory=list)
    boxes: list[Box] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.spans and not self.boxes:
            raise ValueError(f"entity {self.id} has neither spans nor boxes")
        for prev, cur in zip(self.spans, self.spans[1:]):
            if cur.start < prev.end:
                raise ValueError(f"entity {self.id} spans overlap or are unsorted")

    @property
    def start(self) -> int:
        return self.spans[0].start

    @property
    def end(self) -> int:
        return self.spans[-1].end


@dataclass
class Layer:
    """A named collection of entities of one kind. Entities are kept in id order."""

    name: str
    entities: list[Entity] = field(default_factory=list)

    def __post_init__(self):
        if not _LAYER_NAME_RE.match(self.name):
            raise ValueError(f"invalid layer name {self.name!r}")
        self.entities = sorted(self.entities, key=lambda e: e.id)
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate entity ids in layer {self.name!r}")

    def get(self, entity_id: int) -> Entity | None:
        for e in self.entities:
            if e.id == entity_id:
                return e
        return None


@dataclass(frozen=True)
class PageInfo:
    index: int
    width_pts: float
    height_pts: float

    def __post_init__(self):
        if self.width_pts <= 0 or self.height_pts <= 0:
            raise ValueError("page dimensions must be positive")


def normalize_layer_name(name: str) -> str:
    """Lowercase and collapse anything outside [a-z0-9] into underscores."""
    norm = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    if not norm:
        raise ValueError(f"layer name {name!r} normalizes to empty")
    return norm


@dataclass
class Document:
    """The single source of truth: symbols plus named layers of entities.

    Treat instances as immutable once a processing job has completed;
    `add_layer` returns a new Document sharing existing layers.
    """

    doc_id: str
    symbols: str
    pages: list[PageInfo] = field(default_factory=list)
    layers: dict[str, Layer] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def layer(self, name: str) -> Layer:
        if name not in self.layers:
            raise MissingLayerError(f"layer {name!r} not present", layer=name)
        return self.layers[name]

    def has_layer(self, name: str) -> bool:
        return name in self.layers

    def validate_entity(self, entity: Entity) -> None:
        entity.validate()
        for span in entity.spans:
            if span.end > len(self.symbols):
                raise EntityOutOfBoundsError(
                    f"entity {entity.id} span ({span.start}, {span.end}) exceeds "
                    f"symbols length {len(self.symbols)}",
                    entity_id=entity.id,
                )
        for box in entity.boxes:
            if box.page >= len(self.pages):
                raise EntityOutOfBoundsError(
                    f"entity {entity.id} box on page {box.page} but document has "
                    f"{len(self.pages)} pages",
                    entity_id=entity.id,
                )

    def add_layer(self, name: str, entities: list[Entity]) -> "Document":
        """Return a new Document with the layer added; existing layers are shared."""
        if name in self.layers:
            raise DuplicateLayerError(f"layer {name!r} already present", layer=name)
        for entity in entities:
            self.validate_entity(entity)
        layers = dict(self.layers)
        layers[name] = Layer(name, entities)
        return Document(self.doc_id, self.symbols, self.pages, layers, self.metadata)

    def text_of(self, entity: Entity) -> str:
        """Entity text: span slices joined with single spaces; '' if span-less."""
        return " ".join(self.symbols[s.start:s.end] for s in entity.spans)

    def span_to_boxes(self, span: Span) -> list[Box]:
        """Boxes covering a symbol span: per line, the minimal box enclosing the
        overlapping words of that line. Ordered by (page, y, x)."""
        words = self.layer("words")
        lines = self.layer("lines")
        hit_words = [
            w for w in words.entities if w.spans and w.spans[0].overlaps(span)
        ]
        if not hit_words:
            return []
        by_line: dict[int, list[Entity]] = {}
        for word in hit_words:
            line = self._line_containing(lines, word.spans[0].start)
            if line is None:
                continue
            by_line.setdefault(line.id, []).append(word)
        boxes = [
            Box.enclosing([w.boxes[0] for w in members])
            for members in by_line.values()
        ]
        return sorted(boxes, key=lambda b: (b.page, b.y, b.x))

    @staticmethod
    def _line_containing(lines: Layer, offset: int) -> Entity | None:
        for line in lines.entities:
            if line.spans and line.spans[0].start <= offset < line.spans[-1].end:
                return line
        return None

    def entity_at_position(
        self, layer_name: str, page: int, x: float, y: float
    ) -> Entity | None:
        """Entity of the layer whose box contains the point; ties go to the
        smallest box area, then the lowest entity id."""
        layer = self.layer(layer_name)
        best: tuple[float, int, Entity] | None = None
        for entity in layer.entities:
            for box in entity.boxes:
                if box.page == page and box.contains(x, y):
                    key = (box.area, entity.id)
                    if best is None or key < (best[0], best[1]):
                        best = (box.area, entity.id, entity)
        return best[2] if best else None


def map_local_span(parent: Entity, local: Span) -> Span:
    """Map a span local to a single-span parent onto document offsets."""
    if len(parent.spans) != 1:
        raise MultiSpanParentError(
            f"parent entity {parent.id} has {len(parent.spans)} spans, need exactly 1"
        )
    base = parent.spans[0]
    if local.end > base.length:
        raise LocalSpanOutOfRangeError(
            f"local span ({local.start}, {local.end}) exceeds parent length {base.length}"
        )
    return Span(base.start + local.start, base.start + local.end)


def entity_to_json(entity: Entity) -> dict:
    return {
        "id": entity.id,
        "spans": [[s.start, s.end] for s in entity.spans],
        "boxes": [[b.page, b.x, b.y, b.w, b.h] for b in entity.boxes],
        "metadata": entity.metadata,
    }


def _entity_from_json(obj: dict) -> Entity:
    return Entity(
        id=obj["id"],
        spans=[Span(s, e) for s, e in obj["spans"]],
        boxes=[Box(p, x, y, w, h) for p, x, y, w, h in obj["boxes"]],
        metadata=obj.get("metadata", {}),
    )


def document_to_json(doc: Document) -> dict:
    """Plain-dict form of the canonical schema (entities in id order)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "symbols": doc.symbols,
        "pages": [
            {"index": p.index, "width_pts": p.width_pts, "height_pts": p.height_pts}
            for p in doc.pages
        ],
        "layers": {
            name: [entity_to_json(e) for e in layer.entities]
            for name, layer in doc.layers.items()
        },
        "metadata": doc.metadata,
    }


def serialize(doc: Document) -> bytes:
    """Canonical UTF-8 JSON: sorted keys everywhere, no whitespace.

    Serializing the same document twice yields byte-identical output.
    """
    payload = document_to_json(doc)
    return json.dumps(
        payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def deserialize(data: bytes) -> Document:
    """Inverse of serialize; validates schema version and entity bounds."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise MalformedInputError(f"not valid UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInputError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
            position=exc.pos,
        ) from exc
    if not isinstance(obj, dict):
        raise MalformedInputError("top-level JSON value must be an object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema_version {version!r}, supported {SCHEMA_VERSION!r}"
        )
    try:
        pages = [
            PageInfo(p["index"], p["width_pts"], p["height_pts"])
            for p in obj["pages"]
        ]
        doc = Document(
            doc_id=obj["doc_id"],
            symbols=obj["symbols"],
            pages=pages,
            metadata=obj.get("metadata", {}),
        )
        layers: dict[str, Layer] = {}
        for name, entities in obj["layers"].items():
            layers[name] = Layer(name, [_entity_from_json(e) for e in entities])
        doc.layers = layers
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"document structure invalid: {exc}") from exc
    for layer in doc.layers.values():
        for entity in layer.entities:
            doc.validate_entity(entity)
    return doc
