"""HTTP API: upload, processing jobs, documents, renders, and view payloads."""

from __future__ import annotations

import json
import os
from pathlib import Path

from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from layerlab.docmodel import Box
from layerlab.errors import (
    ConfigValidationError,
    LayerlabError,
    MissingLayerError,
    NotAPdfError,
    UnknownPredictorError,
)
from layerlab.pdf.render import PageRenderer, to_png_bytes
from layerlab.pipeline import PipelineConfig
from layerlab.predictors.registry import Registry, default_registry
from layerlab.service.jobs import JobManager
from layerlab.service.store import Store
from layerlab.service.views import build_annotations, build_summary

DEFAULT_PORT = 8402
DEFAULT_MAX_UPLOAD_MB = 50

_STATUS_BY_CODE = {
    "not_a_pdf": 400,
    "encrypted_pdf": 400,
    "config_validation_error": 422,
    "unknown_predictor": 422,
    "missing_layer": 404,
    "schema_version_mismatch": 500,
    "malformed_input": 500,
}


def _error_response(status: int, code: str, message: str, fields: dict | None = None):
    payload = {"error": {"code": code, "message": message}}
    if fields:
        payload["error"]["fields"] = fields
    return JSONResponse(payload, status_code=status)


def create_app(
    data_dir: str | Path | None = None,
    registry: Registry | None = None,
    max_upload_mb: int | None = None,
    workers: int = 2,
    webapp_dir: str | Path | None = None,
) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("LAYERLAB_DATA_DIR", "./data"))
    if max_upload_mb is None:
        max_upload_mb = int(os.environ.get("LAYERLAB_MAX_UPLOAD_MB", DEFAULT_MAX_UPLOAD_MB))
    registry = registry or default_registry()
    store = Store(data_dir)
    jobs = JobManager(store=store, registry=registry, workers=workers)

    app = FastAPI(title="layerlab", version="0.1.0")
    app.state.store = store
    app.state.jobs = jobs
    app.state.registry = registry

    @app.exception_handler(LayerlabError)
    async def layerlab_error_handler(request: Request, exc: LayerlabError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        fields = getattr(exc, "fields", None)
        return _error_response(status, exc.code, exc.message, fields)

    def _load_document(doc_id: str):
        if not store.has_upload(doc_id) and store.document_bytes(doc_id) is None:
            return None, _error_response(404, "unknown_document", f"no document {doc_id}")
        doc = store.load_document(doc_id)
        if doc is None:
            return None, _error_response(
                409, "not_yet_processed", f"document {doc_id} has not been parsed yet"
            )
        return doc, None

    @app.post("/documents")
    async def upload_document(file: UploadFile):
        data = await file.read()
        if len(data) > max_upload_mb * 1024 * 1024:
            return _error_response(
                413, "too_large", f"upload exceeds {max_upload_mb} MB cap"
            )
        if data[:1024].find(b"%PDF-") < 0:
            raise NotAPdfError("uploaded file is not a PDF")
        doc_id, created = store.save_upload(data, file.filename or "document.pdf")
        return JSONResponse({"doc_id": doc_id}, status_code=201 if created else 200)

    @app.get("/predictors")
    def list_predictors():
        return [d.to_json() for d in registry.list_predictors()]

    @app.post("/documents/{doc_id}/process")
    def process_document(doc_id: str, request_body: dict):
        if not store.has_upload(doc_id):
            return _error_response(404, "unknown_document", f"no document {doc_id}")
        predictors = request_body.get("predictors", [])
        if not isinstance(predictors, list):
            raise ConfigValidationError("predictors must be a list")
        for record in predictors:
            if not isinstance(record, dict) or "name" not in record:
                raise ConfigValidationError(
                    "each predictor record needs {name, config}"
                )
        try:
            pipeline_config = PipelineConfig.from_mapping(request_body.get("pipeline_config"))
        except (TypeError, ValueError) as exc:
            raise ConfigValidationError(f"bad pipeline_config: {exc}") from exc
        job_id = jobs.submit(doc_id, predictors, pipeline_config)
        return JSONResponse({"job_id": job_id}, status_code=202)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return _error_response(404, "unknown_job", f"no job {job_id}")
        return job.to_json()

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        data = store.document_bytes(doc_id)
        if data is None:
            if store.has_upload(doc_id):
                return _error_response(
                    409, "not_yet_processed", f"document {doc_id} has not been parsed yet"
                )
            return _error_response(404, "unknown_document", f"no document {doc_id}")
        return Response(content=data, media_type="application/json")

    def _document_json(doc_id: str):
        data = store.document_bytes(doc_id)
        if data is not None:
            return json.loads(data), None
        if store.has_upload(doc_id):
            return None, _error_response(
                409, "not_yet_processed", f"document {doc_id} has not been parsed yet"
            )
        return None, _error_response(404, "unknown_document", f"no document {doc_id}")

    @app.get("/documents/{doc_id}/layers")
    def get_layers(doc_id: str):
        payload, err = _document_json(doc_id)
        if err:
            return err
        return {"layers": sorted(payload["layers"].keys())}

    @app.get("/documents/{doc_id}/layers/{layer_name}")
    def get_layer(doc_id: str, layer_name: str):
        payload, err = _document_json(doc_id)
        if err:
            return err
        layers = payload["layers"]
        if layer_name not in layers:
            return _error_response(404, "unknown_layer", f"no layer {layer_name}")
        return {"layer": layer_name, "entities": layers[layer_name]}

    @app.get("/documents/{doc_id}/pages/{page_index}/image")
    def get_page_image(doc_id: str, page_index: int, dpi: int | None = None):
        doc, err = _load_document(doc_id)
        if err:
            return err
        if not (0 <= page_index < len(doc.pages)):
            return _error_response(404, "unknown_page", f"no page {page_index}")
        default_dpi = 150
        if dpi is None or dpi == default_dpi:
            cached = store.page_png(doc_id, page_index)
            if cached is not None:
                return Response(content=cached, media_type="image/png")
            dpi = default_dpi
        dpi = max(36, min(600, dpi))
        image = PageRenderer(doc).render_page(page_index, dpi)
        return Response(content=to_png_bytes(image), media_type="image/png")

    @app.get("/documents/{doc_id}/entities/{layer_name}/{entity_id}/crop")
    def get_entity_crop(
        doc_id: str, layer_name: str, entity_id: int,
        dpi: int = 150, pad: float = 0.01,
    ):
        doc, err = _load_document(doc_id)
        if err:
            return err
        layer = doc.layer(layer_name)
        entity = layer.get(entity_id)
        if entity is None:
            return _error_response(404, "unknown_entity", f"no entity {entity_id}")
        if not entity.boxes:
            return _error_response(
                422, "entity_has_no_boxes", "entity has no boxes to crop"
            )
        first_page = entity.boxes[0].page
        crop_box = Box.enclosing([b for b in entity.boxes if b.page == first_page])
        dpi = max(36, min(600, dpi))
        image = PageRenderer(doc).crop(crop_box, dpi=dpi, pad=max(0.0, pad))
        page_count = len({b.page for b in entity.boxes})
        headers = {"X-Entity-Page-Count": str(page_count)}
        return Response(content=to_png_bytes(image), media_type="image/png",
                        headers=headers)

    @app.get("/documents/{doc_id}/summary")
    def get_summary(doc_id: str, section: str | None = None):
        doc, err = _load_document(doc_id)
        if err:
            return err
        return build_summary(doc, section)

    @app.get("/documents/{doc_id}/entities/{layer_name}/{entity_id}/annotations")
    def get_annotations(doc_id: str, layer_name: str, entity_id: int):
        doc, err = _load_document(doc_id)
        if err:
            return err
        payload = build_annotations(doc, layer_name, entity_id)
        if payload is None:
            return _error_response(404, "unknown_entity", f"no entity {entity_id}")
        return payload

    webapp_dir = Path(
        webapp_dir or os.environ.get("LAYERLAB_WEBAPP_DIR", "frontend/dist")
    )
    if webapp_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(webapp_dir), html=True), name="webapp")

    return app
