"""Shared document-processing path for the service and the CLI.

Both entry points run this exact code so a batch-processed document is
byte-identical to one processed through the API, and either can be loaded
and visualized interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from layerlab.docmodel import Document
from layerlab.pdf.render import PageRenderer
from layerlab.pipeline import PipelineConfig, run_core_pipeline
from layerlab.predictors.base import EntityError
from layerlab.predictors.registry import Registry
from layerlab.predictors.runners import (
    run_image_predictor,
    run_text_predictor,
    run_token_predictor,
)


@dataclass
class PredictorOutcome:
    name: str
    layer_name: str | None
    errors: list[EntityError] = field(default_factory=list)
    failure: str | None = None


@dataclass
class ProcessOutcome:
    doc: Document
    predictor_outcomes: list[PredictorOutcome] = field(default_factory=list)


def validate_predictor_configs(registry: Registry, predictor_configs: list[dict]) -> None:
    """Raise ConfigValidationError / UnknownPredictorError before any work."""
    for record in predictor_configs:
        registry.validate_config(record.get("name", ""), record.get("config"))


def apply_predictor(doc: Document, registry: Registry, record: dict) -> tuple[Document, PredictorOutcome]:
    """Instantiate one configured predictor and run it over the document."""
    name = record.get("name", "")
    outcome = PredictorOutcome(name=name, layer_name=None)
    try:
        predictor = registry.instantiate(name, record.get("config"))
        kind = registry.get_descriptor(name).kind
        if kind == "token_classification":
            result = run_token_predictor(doc, predictor)
        elif kind == "text_generation":
            result = run_text_predictor(
                doc, predictor, target_layer=record.get("target_layer", "paragraphs")
            )
        else:
            result = run_image_predictor(
                doc,
                predictor,
                PageRenderer(doc),
                target_layer=record.get("target_layer", "tables"),
            )
    except Exception as exc:
        outcome.failure = str(exc)
        return doc, outcome
    outcome.layer_name = result.layer_name
    outcome.errors = result.errors
    return result.doc, outcome


def process_document(
    pdf: bytes,
    source_filename: str,
    pipeline_config: PipelineConfig,
    predictor_configs: list[dict],
    registry: Registry,
    region_hints: list | None = None,
    doc_id: str | None = None,
) -> ProcessOutcome:
    doc = run_core_pipeline(
        pdf,
        pipeline_config,
        region_hints=region_hints,
        source_filename=source_filename,
        doc_id=doc_id,
    )
    outcome = ProcessOutcome(doc=doc)
    for record in predictor_configs:
        doc, predictor_outcome = apply_predictor(doc, registry, record)
        outcome.predictor_outcomes.append(predictor_outcome)
    outcome.doc = doc
    return outcome
