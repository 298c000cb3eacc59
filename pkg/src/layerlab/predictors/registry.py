"""Declarative predictor registry: descriptors, config validation, factories."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from layerlab.errors import ConfigValidationError, UnknownPredictorError

KINDS = ("token_classification", "text_generation", "image")

_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
}


@dataclass(frozen=True)
class ConfigField:
    name: str
    type: str = "string"
    required: bool = False
    secret: bool = False
    default: Any = None
    description: str = ""

    def __post_init__(self):
        if self.type not in _TYPE_CHECKS:
            raise ValueError(f"unknown config field type {self.type!r}")


@dataclass(frozen=True)
class PredictorDescriptor:
    name: str
    kind: str
    config_schema: tuple[ConfigField, ...] = ()
    description: str = ""
    concurrent_safe: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        object.__setattr__(self, "config_schema", tuple(self.config_schema))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "description": self.description,
            "concurrent_safe": self.concurrent_safe,
            "config_schema": [
                {
                    "name": f.name,
                    "type": f.type,
                    "required": f.required,
                    "secret": f.secret,
                    "default": f.default,
                    "description": f.description,
                }
                for f in self.config_schema
            ],
        }


@dataclass
class Registry:
    """Registration-order-stable predictor catalog."""

    _entries: dict[str, tuple[PredictorDescriptor, Callable[[dict], Any]]] = field(
        default_factory=dict
    )

    def register(self, descriptor: PredictorDescriptor, factory: Callable[[dict], Any]) -> None:
        if descriptor.name in self._entries:
            raise ValueError(f"predictor {descriptor.name!r} already registered")
        self._entries[descriptor.name] = (descriptor, factory)

    def list_predictors(self) -> list[PredictorDescriptor]:
        return [desc for desc, _ in self._entries.values()]

    def get_descriptor(self, name: str) -> PredictorDescriptor:
        if name not in self._entries:
            raise UnknownPredictorError(f"no predictor named {name!r}")
        return self._entries[name][0]

    def validate_config(self, name: str, config: dict | None) -> dict:
        """Check a config record against the schema; returns the config with
        defaults filled in."""
        descriptor = self.get_descriptor(name)
        config = dict(config or {})
        problems: dict[str, str] = {}
        known = {f.name for f in descriptor.config_schema}
        for key in config:
            if key not in known:
                problems[key] = "unknown field"
        for fld in descriptor.config_schema:
            if fld.name not in config or config[fld.name] is None:
                if fld.required:
                    problems[fld.name] = "required field missing"
                elif fld.default is not None:
                    config[fld.name] = fld.default
                continue
            if not _TYPE_CHECKS[fld.type](config[fld.name]):
                problems[fld.name] = f"expected {fld.type}"
        if problems:
            raise ConfigValidationError(
                f"invalid config for predictor {name!r}: "
                + ", ".join(f"{k} ({v})" for k, v in sorted(problems.items())),
                fields=problems,
            )
        return config

    def instantiate(self, name: str, config: dict | None = None):
        validated = self.validate_config(name, config)
        descriptor, factory = self._entries[name]
        predictor = factory(validated)
        predictor.name = name
        predictor.descriptor = descriptor
        return predictor


def default_registry() -> Registry:
    """Registry with the built-in reference predictors."""
    from layerlab.predictors import builtins as b

    registry = Registry()
    for descriptor, factory in b.BUILTINS:
        registry.register(descriptor, factory)
    return registry
