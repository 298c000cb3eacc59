"""Command-line entry points: batch processing, table export, and serving."""

from __future__ import annotations

import csv
import json
import socket
import sys
from pathlib import Path

import click
import yaml

from layerlab.docmodel import deserialize, serialize
from layerlab.errors import ConfigValidationError, LayerlabError
from layerlab.pipeline import PipelineConfig
from layerlab.predictors.registry import default_registry
from layerlab.processing import process_document, validate_predictor_configs
from layerlab.service.store import Store, content_doc_id

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_SOME_FAILED = 2
EXIT_NO_TABLES = 3


@click.group()
def main():
    """Scientific-PDF extraction workbench."""


def _load_config_file(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        return yaml.safe_load(text) or {}
    return json.loads(text)


def _region_hints_for(pdf_path: Path) -> list | None:
    sidecar = pdf_path.with_name(pdf_path.stem + ".regions.json")
    if not sidecar.exists():
        return None
    try:
        return json.loads(sidecar.read_text(encoding="utf-8")).get("tables")
    except ValueError:
        click.echo(f"warning: unreadable region sidecar {sidecar}", err=True)
        return None


@main.command("process")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="YAML or JSON batch config.")
@click.option("--input", "input_dir", type=click.Path(path_type=Path), default=None,
              help="Override input_dir from the config file.")
@click.option("--output", "output_dir", type=click.Path(path_type=Path), default=None,
              help="Override output_dir from the config file.")
def process_command(config_path: Path, input_dir: Path | None, output_dir: Path | None):
    """Process every *.pdf in the input directory with the configured pipeline.

    Exit codes: 0 all ok, 1 config error, 2 one or more files failed.
    """
    try:
        raw = _load_config_file(config_path)
        input_dir = input_dir or Path(raw.get("input_dir", ""))
        output_dir = output_dir or Path(raw.get("output_dir", ""))
        if not input_dir or not input_dir.is_dir():
            raise ConfigValidationError(f"input_dir {input_dir} is not a directory")
        if not output_dir:
            raise ConfigValidationError("output_dir is required")
        pipeline_config = PipelineConfig.from_mapping(raw.get("pipeline_config"))
        predictor_configs = raw.get("predictors", [])
        continue_on_error = bool(raw.get("continue_on_error", True))
        registry = default_registry()
        validate_predictor_configs(registry, predictor_configs)
    except (LayerlabError, ValueError, TypeError, KeyError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    store = Store(output_dir)
    failed = 0
    pdf_paths = sorted(input_dir.glob("*.pdf"))
    if not pdf_paths:
        click.echo(f"no PDFs found in {input_dir}", err=True)
    for pdf_path in pdf_paths:
        pdf = pdf_path.read_bytes()
        try:
            outcome = process_document(
                pdf,
                source_filename=pdf_path.name,
                pipeline_config=pipeline_config,
                predictor_configs=predictor_configs,
                registry=registry,
                region_hints=_region_hints_for(pdf_path),
                doc_id=content_doc_id(pdf),
            )
            doc = outcome.doc
            store.save_upload(pdf, pdf_path.name)
            store.save_document(doc)
            store.save_page_renders(doc, pipeline_config.render_dpi)
            for pred in outcome.predictor_outcomes:
                if pred.errors:
                    store.write_errors(doc.doc_id, pred.name, pred.errors)
                if pred.failure:
                    click.echo(f"  predictor {pred.name} failed: {pred.failure}", err=True)
            entity_count = sum(len(l.entities) for l in doc.layers.values())
            click.echo(
                f"ok {pdf_path.name} doc_id={doc.doc_id[:12]} "
                f"layers={len(doc.layers)} entities={entity_count}"
            )
        except Exception as exc:
            failed += 1
            error_path = Path(output_dir) / f"{pdf_path.stem}.error.txt"
            error_path.parent.mkdir(parents=True, exist_ok=True)
            error_path.write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
            click.echo(f"failed {pdf_path.name}: {exc}", err=True)
            if not continue_on_error:
                sys.exit(EXIT_SOME_FAILED)
    sys.exit(EXIT_SOME_FAILED if failed else EXIT_OK)


@main.command("export-tables")
@click.option("--doc", "doc_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Path to a document.json.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def export_tables_command(doc_path: Path, out_dir: Path):
    """Write every parsed table of the document's image result layers to CSV.

    Exit code 3 when the document contains no parsed tables.
    """
    doc = deserialize(doc_path.read_bytes())
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for layer_name in sorted(doc.layers):
        if not layer_name.startswith("image_"):
            continue
        for entity in doc.layers[layer_name].entities:
            table = entity.metadata.get("table")
            if not isinstance(table, dict) or not table:
                continue
            path = out_dir / f"{doc.doc_id}_{layer_name}_{entity.id}.csv"
            _write_table_csv(path, table)
            click.echo(f"wrote {path}")
            written += 1
    if not written:
        click.echo("no parsed tables found", err=True)
        sys.exit(EXIT_NO_TABLES)


def _write_table_csv(path: Path, table: dict) -> None:
    columns = list(table.keys())
    height = max((len(v) for v in table.values()), default=0)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for i in range(height):
            writer.writerow([
                table[c][i] if i < len(table[c]) else "" for c in columns
            ])


@main.command("serve")
@click.option("--port", type=int, default=None, help="Defaults to $LAYERLAB_PORT or 8402.")
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Defaults to $LAYERLAB_DATA_DIR or ./data.")
@click.option("--webapp-dir", type=click.Path(path_type=Path), default=None)
def serve_command(port: int | None, host: str, data_dir: Path | None,
                  webapp_dir: Path | None):
    """Run the HTTP service until interrupted; creates the data dir if needed."""
    import os

    import uvicorn

    from layerlab.service.app import DEFAULT_PORT, create_app

    if port is None:
        port = int(os.environ.get("LAYERLAB_PORT", DEFAULT_PORT))
    app = create_app(data_dir=data_dir, webapp_dir=webapp_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
        sock.close()
        sys.exit(1)
    bound_port = sock.getsockname()[1]
    click.echo(f"layerlab serving on http://{host}:{bound_port}")
    sock.listen(128)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])


if __name__ == "__main__":
    main()
