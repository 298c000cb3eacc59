"""Client for any image service speaking the workbench's multipart schema:
PNG in, JSON {raw_text?, table?, boxes?} out."""

from __future__ import annotations

import requests

from layerlab.errors import InvalidResponseSchemaError, RemoteServiceError
from layerlab.pdf.render import to_png_bytes
from layerlab.predictors.base import ImageOutput, ImagePredictor


def post_image(service_url: str, image, timeout_s: int = 60) -> ImageOutput:
    png = to_png_bytes(image)
    try:
        response = requests.post(
            service_url,
            files={"image": ("crop.png", png, "image/png")},
            timeout=timeout_s,
        )
    except requests.RequestException as exc:
        raise RemoteServiceError(f"image service unreachable: {exc}") from exc
    if response.status_code != 200:
        raise RemoteServiceError(
            f"image service returned {response.status_code}: {response.text[:200]}",
            status=response.status_code,
        )
    try:
        payload = response.json()
    except ValueError as exc:
        raise InvalidResponseSchemaError(f"response is not JSON: {exc}") from exc
    return parse_image_response(payload)


def parse_image_response(payload: dict) -> ImageOutput:
    if not isinstance(payload, dict):
        raise InvalidResponseSchemaError("response must be a JSON object")
    raw_text = payload.get("raw_text")
    if raw_text is not None and not isinstance(raw_text, str):
        raise InvalidResponseSchemaError("raw_text must be a string")
    table = payload.get("table")
    if table is not None:
        if not isinstance(table, dict) or not all(
            isinstance(k, str) and isinstance(v, list) for k, v in table.items()
        ):
            raise InvalidResponseSchemaError("table must map names to lists")
    boxes = None
    if payload.get("boxes") is not None:
        if not isinstance(payload["boxes"], list):
            raise InvalidResponseSchemaError("boxes must be a list")
        boxes = []
        for item in payload["boxes"]:
            if not isinstance(item, list) or len(item) < 4:
                raise InvalidResponseSchemaError(
                    "each box needs [x, y, w, h, label?, score?]"
                )
            x, y, w, h = (float(v) for v in item[:4])
            label = str(item[4]) if len(item) > 4 else ""
            score = float(item[5]) if len(item) > 5 else 1.0
            boxes.append((x, y, w, h, label, score))
    output = ImageOutput(raw_text=raw_text, table=table, boxes=boxes)
    try:
        output.validate()
    except ValueError as exc:
        raise InvalidResponseSchemaError(str(exc)) from exc
    return output


class RemoteImagePredictor(ImagePredictor):
    name = "remote_image"

    def __init__(self, service_url: str, timeout_s: int = 60):
        self.service_url = service_url
        self.timeout_s = timeout_s

    def process_image(self, image) -> ImageOutput:
        return post_image(self.service_url, image, self.timeout_s)
