"""Predictor interfaces and response post-processing.

Three kinds of predictor annotate a document: token classifiers tag spans
in sentence text, text generators map entity text to a response string, and
image predictors consume a region crop (or the full entity) and return any
combination of raw text, a table record and bounding boxes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TaggedSpan:
    """Sentence-local labeled character interval, half-open."""

    start: int
    end: int
    label: str
    score: float = 1.0


@dataclass(frozen=True)
class GenerationMessage:
    """System and user messages for a chat-style generation call."""

    system: str
    user: str


@dataclass
class ImageOutput:
    """Result of an image predictor; at least one field must be populated.

    `table` maps column names to equal-length value lists. `boxes` are
    crop-relative normalized (x, y, w, h, label, score) tuples.
    """

    raw_text: str | None = None
    table: dict[str, list] | None = None
    boxes: list[tuple[float, float, float, float, str, float]] | None = None

    def validate(self) -> None:
        if self.raw_text is None and self.table is None and self.boxes is None:
            raise ValueError("image output must populate at least one field")
        if self.table is not None:
            lengths = {len(v) for v in self.table.values()}
            if len(lengths) > 1:
                raise ValueError("table columns must all have the same length")


@dataclass
class EntityError:
    """Per-entity failure record; never aborts a run."""

    entity_id: int
    layer: str
    message: str
    predictor: str

    def to_json(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "layer": self.layer,
            "message": self.message,
            "predictor": self.predictor,
        }


@dataclass(frozen=True)
class ParseFailure:
    """Marker value for a response that did not parse; raw text retained."""

    reason: str
    raw: str = ""


def postprocess_to_record(response: str) -> dict | ParseFailure:
    """Default post-processor: the entire trimmed response must be one JSON
    object. Anything else is a parse failure, not an error."""
    text = response.strip()
    if not text:
        return ParseFailure("empty response", response)
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        return ParseFailure(f"not valid JSON: {exc.msg} at position {exc.pos}", response)
    if not isinstance(value, dict):
        return ParseFailure(f"JSON value is {type(value).__name__}, not an object", response)
    return value


def extract_first_json_value(response: str) -> dict | list | ParseFailure:
    """Find and parse the first balanced {...} or [...] region, ignoring
    surrounding prose and code fences. String literals are respected when
    matching brackets."""
    i = 0
    n = len(response)
    while i < n:
        ch = response[i]
        if ch in "{[":
            end = _balanced_end(response, i)
            if end is not None:
                candidate = response[i:end]
                try:
                    return json.loads(candidate)
                except json.JSONDecodeError:
                    pass
        i += 1
    return ParseFailure("no JSON value found", response)


def _balanced_end(text: str, start: int) -> int | None:
    """Index one past the bracket matching text[start], or None."""
    pairs = {"{": "}", "[": "]"}
    stack = [pairs[text[start]]]
    i = start + 1
    in_string = False
    escaped = False
    while i < len(text):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in pairs:
            stack.append(pairs[ch])
        elif ch in "}]":
            if ch != stack.pop():
                return None
            if not stack:
                return i + 1
        i += 1
    return None


class TokenClassificationPredictor:
    """Tags labeled spans in batches of sentence strings."""

    name = "token_classifier"

    def tag_batch(self, texts: list[str]) -> list[list[TaggedSpan]]:
        raise NotImplementedError


class TextGenerationPredictor:
    """Maps entity text to a response string, post-processed to a record."""

    name = "text_generator"

    def generate(self, entity_text: str) -> str:
        raise NotImplementedError

    def postprocess(self, response: str) -> dict | list | ParseFailure:
        return postprocess_to_record(response)


class ImagePredictor:
    """Processes an entity's region; override process_image for image-only
    models, or process_entity for multimodal access to the document."""

    name = "image_predictor"

    def process_image(self, image) -> ImageOutput:
        raise NotImplementedError

    def process_entity(self, doc, entity, renderer) -> ImageOutput:
        from layerlab.docmodel import Box

        if not entity.boxes:
            raise ValueError("entity has no boxes to crop")
        page = entity.boxes[0].page
        crop_box = Box.enclosing([b for b in entity.boxes if b.page == page])
        return self.process_image(renderer.crop(crop_box))
