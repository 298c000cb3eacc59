"""Filesystem persistence: one self-contained directory per document.

Layout: <root>/<doc_id>/original.pdf, upload.json, document.json,
pages/<n>.png, errors/<predictor>.jsonl, jobs/<job_id>.json. Writes are
atomic (temp file + rename) so readers always see complete artifacts, and a
document.json dropped in place by an external batch run is served as-is.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from layerlab.docmodel import Document, deserialize, serialize
from layerlab.pdf.render import PageRenderer, to_png_bytes


def atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def content_doc_id(pdf: bytes) -> str:
    return hashlib.sha256(pdf).hexdigest()


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def doc_dir(self, doc_id: str) -> Path:
        return self.root / doc_id

    # -- uploads ------------------------------------------------------------

    def save_upload(self, pdf: bytes, filename: str) -> tuple[str, bool]:
        """Content-addressed save; returns (doc_id, newly_created)."""
        doc_id = content_doc_id(pdf)
        pdf_path = self.doc_dir(doc_id) / "original.pdf"
        created = not pdf_path.exists()
        if created:
            atomic_write(pdf_path, pdf)
            atomic_write(
                self.doc_dir(doc_id) / "upload.json",
                json.dumps({"filename": filename}).encode("utf-8"),
            )
        return doc_id, created

    def has_upload(self, doc_id: str) -> bool:
        return (self.doc_dir(doc_id) / "original.pdf").exists()

    def pdf_bytes(self, doc_id: str) -> bytes:
        return (self.doc_dir(doc_id) / "original.pdf").read_bytes()

    def upload_filename(self, doc_id: str) -> str:
        path = self.doc_dir(doc_id) / "upload.json"
        if path.exists():
            try:
                return json.loads(path.read_text(encoding="utf-8"))["filename"]
            except (ValueError, KeyError):
                pass
        return "document.pdf"

    def region_hints(self, doc_id: str) -> list | None:
        """Optional drop-in sidecar <doc_dir>/regions.json."""
        path = self.doc_dir(doc_id) / "regions.json"
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8")).get("tables")
        except ValueError:
            return None

    # -- documents ----------------------------------------------------------

    def save_document(self, doc: Document) -> None:
        atomic_write(self.doc_dir(doc.doc_id) / "document.json", serialize(doc))

    def document_bytes(self, doc_id: str) -> bytes | None:
        path = self.doc_dir(doc_id) / "document.json"
        return path.read_bytes() if path.exists() else None

    def load_document(self, doc_id: str) -> Document | None:
        data = self.document_bytes(doc_id)
        return deserialize(data) if data is not None else None

    def save_page_renders(self, doc: Document, dpi: int) -> None:
        renderer = PageRenderer(doc)
        pages_dir = self.doc_dir(doc.doc_id) / "pages"
        for page in doc.pages:
            atomic_write(
                pages_dir / f"{page.index}.png",
                to_png_bytes(renderer.render_page(page.index, dpi)),
            )

    def page_png(self, doc_id: str, page_index: int) -> bytes | None:
        path = self.doc_dir(doc_id) / "pages" / f"{page_index}.png"
        return path.read_bytes() if path.exists() else None

    # -- errors and jobs ------------------------------------------------------

    def write_errors(self, doc_id: str, predictor: str, errors: list) -> None:
        lines = "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in errors)
        atomic_write(self.doc_dir(doc_id) / "errors" / f"{predictor}.jsonl",
                     lines.encode("utf-8"))

    def read_errors(self, doc_id: str, predictor: str) -> list[dict]:
        path = self.doc_dir(doc_id) / "errors" / f"{predictor}.jsonl"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]

    def save_job(self, job_id: str, payload: dict) -> None:
        atomic_write(
            self.root / "_jobs" / f"{job_id}.json",
            json.dumps(payload, sort_keys=True).encode("utf-8"),
        )
        doc_id = payload.get("doc_id")
        if doc_id:
            atomic_write(
                self.doc_dir(doc_id) / "jobs" / f"{job_id}.json",
                json.dumps(payload, sort_keys=True).encode("utf-8"),
            )

    def load_job(self, job_id: str) -> dict | None:
        path = self.root / "_jobs" / f"{job_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))
