"""Aggregation payloads backing the overview and annotations views."""

from __future__ import annotations

from layerlab.docmodel import Box, Document, Entity, entity_to_json

# a caption block links to a table region within this vertical distance
CAPTION_LINK_DISTANCE = 0.1

TAGGED_PREFIX = "tagged_"
GENERATED_PREFIX = "generated_"
IMAGE_PREFIX = "image_"


def _entity_ref(layer: str, entity: Entity) -> dict:
    return {"layer": layer, "id": entity.id}


def _section_names(doc: Document) -> list[str]:
    if not doc.has_layer("sections"):
        return []
    entities = sorted(
        doc.layers["sections"].entities, key=lambda e: e.metadata.get("order", 0)
    )
    return [e.metadata.get("name", "") for e in entities]


def build_summary(doc: Document, section: str | None = None) -> dict:
    """Overview payload: tag rows, generation tables, image entries.

    A section filter restricts tagging and generation rows by each entity's
    section metadata.
    """
    tagging = []
    generation = []
    images = []
    for name in sorted(doc.layers):
        if name.startswith(TAGGED_PREFIX):
            rows = [
                {
                    "text": doc.text_of(e),
                    "label": e.metadata.get("label", ""),
                    "score": e.metadata.get("score", 1.0),
                    "section": e.metadata.get("section", ""),
                    "entity": _entity_ref(name, e),
                }
                for e in doc.layers[name].entities
                if section is None or e.metadata.get("section", "") == section
            ]
            tagging.append({"layer": name, "rows": rows})
        elif name.startswith(GENERATED_PREFIX):
            generation.append(_generation_table(doc, name, section))
        elif name.startswith(IMAGE_PREFIX):
            images.append(_image_entries(doc, name))
    return {
        "doc_id": doc.doc_id,
        "sections": _section_names(doc),
        "tagging": tagging,
        "generation": generation,
        "images": images,
    }


def _generation_table(doc: Document, layer_name: str, section: str | None) -> dict:
    entities = [
        e
        for e in doc.layers[layer_name].entities
        if section is None or e.metadata.get("section", "") == section
    ]
    columns: set[str] = set()
    for e in entities:
        parsed = e.metadata.get("parsed")
        if isinstance(parsed, dict):
            columns.update(parsed.keys())
        elif parsed is not None:
            columns.add("value")
    ordered_columns = sorted(columns)
    rows = []
    for e in entities:
        parsed = e.metadata.get("parsed")
        if isinstance(parsed, dict):
            values = {col: parsed.get(col, "") for col in ordered_columns}
        elif parsed is not None:
            values = {col: "" for col in ordered_columns}
            values["value"] = parsed
        else:
            values = {col: "" for col in ordered_columns}
        rows.append(
            {
                "section": e.metadata.get("section", ""),
                "values": values,
                "parse_error": e.metadata.get("parse_error"),
                "entity": _entity_ref(layer_name, e),
            }
        )
    return {"layer": layer_name, "columns": ordered_columns, "rows": rows}


def _image_entries(doc: Document, layer_name: str) -> dict:
    entries = []
    for e in doc.layers[layer_name].entities:
        boxes = e.metadata.get("boxes") or []
        entries.append(
            {
                "raw_text": e.metadata.get("raw_text"),
                "table": e.metadata.get("table"),
                "box_count": len(boxes),
                "caption": _nearest_caption(doc, e),
                "section": e.metadata.get("section", ""),
                "entity": _entity_ref(layer_name, e),
            }
        )
    return {"layer": layer_name, "entries": entries}


def _nearest_caption(doc: Document, entity: Entity) -> str | None:
    """Caption text of the closest caption block directly above or below the
    entity's region, within CAPTION_LINK_DISTANCE normalized height."""
    if not entity.boxes or not doc.has_layer("captions"):
        return None
    page = entity.boxes[0].page
    region = Box.enclosing([b for b in entity.boxes if b.page == page])
    best: tuple[float, str] | None = None
    for caption in doc.layers["captions"].entities:
        for box in caption.boxes:
            if box.page != page:
                continue
            if box.y + box.h <= region.y:  # caption above
                gap = region.y - (box.y + box.h)
            elif box.y >= region.y + region.h:  # caption below
                gap = box.y - (region.y + region.h)
            else:
                gap = 0.0
            if gap <= CAPTION_LINK_DISTANCE and (best is None or gap < best[0]):
                best = (gap, doc.text_of(caption))
    return best[1] if best else None


def _result_within(target: Entity, result: Entity) -> bool:
    if target.spans and result.spans:
        return result.start >= target.start and result.end <= target.end
    if not target.boxes or not result.boxes:
        return False
    eps = 1e-6
    regions = {}
    for box in target.boxes:
        regions.setdefault(box.page, []).append(box)
    enclosing = {page: Box.enclosing(boxes) for page, boxes in regions.items()}
    for box in result.boxes:
        region = enclosing.get(box.page)
        if region is None:
            return False
        if not (
            box.x >= region.x - eps
            and box.y >= region.y - eps
            and box.x + box.w <= region.x + region.w + eps
            and box.y + box.h <= region.y + region.h + eps
        ):
            return False
    return True


def build_annotations(doc: Document, layer_name: str, entity_id: int) -> dict | None:
    """Per-entity payload: text, sentence segmentation, grouped model results."""
    layer = doc.layer(layer_name)
    entity = layer.get(entity_id)
    if entity is None:
        return None
    sentences = []
    if entity.spans and doc.has_layer("sentences"):
        sentences = [
            [s.start, s.end]
            for sent in doc.layers["sentences"].entities
            for s in sent.spans
            if s.start >= entity.start and s.end <= entity.end
        ]
    results = []
    for name in sorted(doc.layers):
        kind = None
        for prefix, label in (
            (TAGGED_PREFIX, "tagged"),
            (GENERATED_PREFIX, "generated"),
            (IMAGE_PREFIX, "image"),
        ):
            if name.startswith(prefix):
                kind = label
                predictor = name[len(prefix):]
                break
        if kind is None:
            continue
        hits = [
            entity_to_json(e)
            for e in doc.layers[name].entities
            if _result_within(entity, e)
        ]
        results.append(
            {"layer": name, "kind": kind, "predictor": predictor, "entities": hits}
        )
    return {
        "entity": entity_to_json(entity),
        "layer": layer_name,
        "text": doc.text_of(entity),
        "sentences": sentences,
        "results": results,
    }
