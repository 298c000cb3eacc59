"""Runners that apply predictors to a Document and collect result layers.

Every runner isolates per-entity failures: a failing input becomes an
EntityError and the run continues. Results land in a new layer named
tagged_/generated_/image_ + the predictor name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from layerlab.docmodel import (
    Box,
    Document,
    Entity,
    Span,
    map_local_span,
    normalize_layer_name,
)
from layerlab.predictors.base import (
    EntityError,
    ImagePredictor,
    ParseFailure,
    TextGenerationPredictor,
    TokenClassificationPredictor,
)


@dataclass
class RunResult:
    doc: Document
    layer_name: str
    errors: list[EntityError] = field(default_factory=list)


def _unique_layer_name(doc: Document, base: str) -> str:
    """Re-running a predictor gets a counter suffix instead of clobbering."""
    base = normalize_layer_name(base)
    if not doc.has_layer(base):
        return base
    counter = 2
    while doc.has_layer(f"{base}_{counter}"):
        counter += 1
    return f"{base}_{counter}"


def run_token_predictor(
    doc: Document,
    predictor: TokenClassificationPredictor,
    batch_size: int = 32,
) -> RunResult:
    """Tag all sentences, mapping sentence-local offsets to document spans."""
    sentences = doc.layer("sentences").entities
    layer_name = _unique_layer_name(doc, f"tagged_{predictor.name}")
    errors: list[EntityError] = []
    entities: list[Entity] = []
    for base in range(0, len(sentences), batch_size):
        batch = sentences[base:base + batch_size]
        texts = [doc.text_of(s) for s in batch]
        try:
            tag_lists = predictor.tag_batch(texts)
            if len(tag_lists) != len(batch):
                raise ValueError(
                    f"predictor returned {len(tag_lists)} lists for {len(batch)} texts"
                )
        except Exception as exc:
            errors.extend(
                EntityError(s.id, "sentences", str(exc), predictor.name) for s in batch
            )
            continue
        for sentence, text, tags in zip(batch, texts, tag_lists):
            for tag in tags:
                try:
                    entities.append(
                        _tagged_entity(doc, sentence, text, tag, len(entities))
                    )
                except Exception as exc:
                    errors.append(
                        EntityError(sentence.id, "sentences", str(exc), predictor.name)
                    )
    return RunResult(doc.add_layer(layer_name, entities), layer_name, errors)


def _tagged_entity(doc: Document, sentence: Entity, text: str, tag, entity_id: int) -> Entity:
    if not tag.label:
        raise ValueError("tagged span has an empty label")
    if not (0.0 <= tag.score <= 1.0):
        raise ValueError(f"score {tag.score} outside [0, 1]")
    if not (0 <= tag.start < tag.end <= len(text)):
        raise ValueError(
            f"tagged span ({tag.start}, {tag.end}) invalid for sentence of length {len(text)}"
        )
    span = map_local_span(sentence, Span(tag.start, tag.end))
    return Entity(
        entity_id,
        spans=[span],
        boxes=doc.span_to_boxes(span),
        metadata={
            "label": tag.label,
            "score": tag.score,
            "sentence_id": sentence.id,
            "section": sentence.metadata.get("section", ""),
        },
    )


def run_text_predictor(
    doc: Document,
    predictor: TextGenerationPredictor,
    target_layer: str = "paragraphs",
) -> RunResult:
    """One generation call per target entity; response parsed to a record."""
    targets = doc.layer(target_layer).entities
    layer_name = _unique_layer_name(doc, f"generated_{predictor.name}")
    errors: list[EntityError] = []
    entities: list[Entity] = []
    for target in targets:
        try:
            response = predictor.generate(doc.text_of(target))
        except Exception as exc:
            errors.append(EntityError(target.id, target_layer, str(exc), predictor.name))
            continue
        parsed = predictor.postprocess(response)
        if isinstance(parsed, ParseFailure):
            parsed_value, parse_error = None, parsed.reason
        else:
            parsed_value, parse_error = parsed, None
        entities.append(
            Entity(
                len(entities),
                spans=list(target.spans),
                boxes=list(target.boxes),
                metadata={
                    "raw_response": response,
                    "parsed": parsed_value,
                    "parse_error": parse_error,
                    "section": target.metadata.get("section", ""),
                    "target_layer": target_layer,
                    "target_id": target.id,
                },
            )
        )
    return RunResult(doc.add_layer(layer_name, entities), layer_name, errors)


def crop_box_to_page(crop: Box, box: tuple[float, float, float, float]) -> Box:
    """Map a crop-relative normalized box back onto page coordinates."""
    x, y, w, h = box
    eps = 1e-9
    px = min(max(crop.x + x * crop.w, 0.0), 1.0)
    py = min(max(crop.y + y * crop.h, 0.0), 1.0)
    pw = max(min(w * crop.w, 1.0 - px), eps)
    ph = max(min(h * crop.h, 1.0 - py), eps)
    return Box(crop.page, px, py, pw, ph)


def page_box_to_crop(crop: Box, box: Box) -> tuple[float, float, float, float]:
    """Inverse of crop_box_to_page for boxes on the crop's page."""
    return (
        (box.x - crop.x) / crop.w,
        (box.y - crop.y) / crop.h,
        box.w / crop.w,
        box.h / crop.h,
    )


def enclosing_crop_box(entity: Entity) -> Box:
    """The region an image predictor sees: the union of the entity's boxes
    on its first page."""
    if not entity.boxes:
        raise ValueError("entity has no boxes")
    page = entity.boxes[0].page
    return Box.enclosing([b for b in entity.boxes if b.page == page])


def run_image_predictor(
    doc: Document,
    predictor: ImagePredictor,
    renderer,
    target_layer: str = "tables",
) -> RunResult:
    """Apply an image predictor to each target entity's region."""
    targets = doc.layer(target_layer).entities
    layer_name = _unique_layer_name(doc, f"image_{predictor.name}")
    errors: list[EntityError] = []
    entities: list[Entity] = []
    for target in targets:
        try:
            crop = enclosing_crop_box(target)
            output = predictor.process_entity(doc, target, renderer)
            output.validate()
        except Exception as exc:
            errors.append(EntityError(target.id, target_layer, str(exc), predictor.name))
            continue
        page_boxes = None
        if output.boxes is not None:
            page_boxes = []
            for bx in output.boxes:
                x, y, w, h = bx[0], bx[1], bx[2], bx[3]
                label = bx[4] if len(bx) > 4 else ""
                score = bx[5] if len(bx) > 5 else 1.0
                mapped = crop_box_to_page(crop, (x, y, w, h))
                page_boxes.append(
                    [mapped.page, mapped.x, mapped.y, mapped.w, mapped.h, label, score]
                )
        entities.append(
            Entity(
                len(entities),
                spans=list(target.spans),
                boxes=list(target.boxes),
                metadata={
                    "raw_text": output.raw_text,
                    "table": output.table,
                    "boxes": page_boxes,
                    "section": target.metadata.get("section", ""),
                    "target_layer": target_layer,
                    "target_id": target.id,
                },
            )
        )
    return RunResult(doc.add_layer(layer_name, entities), layer_name, errors)
