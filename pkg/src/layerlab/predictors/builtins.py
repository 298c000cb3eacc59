"""Descriptors and factories for the built-in predictors."""

from __future__ import annotations

from layerlab.errors import ConfigValidationError
from layerlab.predictors.chat import ChatCompletionPredictor, ChatConfig
from layerlab.predictors.gazetteer import GazetteerTagger, load_lexicon, parse_lexicon
from layerlab.predictors.registry import ConfigField, PredictorDescriptor
from layerlab.predictors.remote_image import RemoteImagePredictor
from layerlab.predictors.tables import GeometricTableParser


def _make_gazetteer(config: dict) -> GazetteerTagger:
    inline = config.get("lexicon_inline")
    path = config.get("lexicon_path")
    if inline:
        return GazetteerTagger(parse_lexicon(inline))
    if path:
        return GazetteerTagger(load_lexicon(path))
    raise ConfigValidationError(
        "gazetteer needs lexicon_path or lexicon_inline",
        fields={"lexicon_path": "set this or lexicon_inline"},
    )


def _make_chat(config: dict) -> ChatCompletionPredictor:
    return ChatCompletionPredictor(
        ChatConfig(
            endpoint_url=config["endpoint_url"],
            model=config["model"],
            api_key_env=config["api_key_env"],
            system_prompt=config.get("system_prompt", ""),
            user_prompt_template=config.get("user_prompt_template", "{entity_text}"),
            temperature=float(config.get("temperature", 0.0)),
            timeout_s=int(config.get("timeout_s", 60)),
            postprocess=config.get("postprocess", "whole_json"),
        )
    )


def _make_geometric_table(config: dict) -> GeometricTableParser:
    return GeometricTableParser(
        detection_service_url=config.get("detection_service_url"),
        timeout_s=int(config.get("timeout_s", 60)),
    )


def _make_remote_image(config: dict) -> RemoteImagePredictor:
    return RemoteImagePredictor(
        service_url=config["service_url"],
        timeout_s=int(config.get("timeout_s", 60)),
    )


BUILTINS = [
    (
        PredictorDescriptor(
            name="gazetteer",
            kind="token_classification",
            description="Tags spans from a TSV lexicon (literal or regex entries).",
            concurrent_safe=True,
            config_schema=(
                ConfigField("lexicon_path", "string",
                            description="Path to a surface<TAB>label[<TAB>flags] file"),
                ConfigField("lexicon_inline", "string",
                            description="Lexicon TSV content given directly"),
            ),
        ),
        _make_gazetteer,
    ),
    (
        PredictorDescriptor(
            name="chat",
            kind="text_generation",
            description="OpenAI-compatible chat completion over entity text.",
            config_schema=(
                ConfigField("endpoint_url", "string", required=True,
                            description="Base URL, e.g. https://api.example.com/v1"),
                ConfigField("model", "string", required=True),
                ConfigField("api_key_env", "string", required=True, secret=True,
                            description="Name of the environment variable holding the key"),
                ConfigField("system_prompt", "string", default=""),
                ConfigField("user_prompt_template", "string", default="{entity_text}",
                            description="Must contain {entity_text} exactly once"),
                ConfigField("temperature", "float", default=0.0),
                ConfigField("timeout_s", "int", default=60),
                ConfigField("postprocess", "string", default="whole_json",
                            description="whole_json or first_json"),
            ),
        ),
        _make_chat,
    ),
    (
        PredictorDescriptor(
            name="geometric_table",
            kind="image",
            description="Parses table regions by cross-referencing geometry with PDF text.",
            concurrent_safe=True,
            config_schema=(
                ConfigField("detection_service_url", "string",
                            description="Optional cell-detection service URL"),
                ConfigField("timeout_s", "int", default=60),
            ),
        ),
        _make_geometric_table,
    ),
    (
        PredictorDescriptor(
            name="remote_image",
            kind="image",
            description="Sends region crops to a remote image service.",
            config_schema=(
                ConfigField("service_url", "string", required=True),
                ConfigField("timeout_s", "int", default=60),
            ),
        ),
        _make_remote_image,
    ),
]
