"""Shared exception types. Every error carries a stable machine-readable code."""


class LayerlabError(Exception):
    """Base class; `code` is the stable identifier used in API error payloads."""

    code = "internal_error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details


class DuplicateLayerError(LayerlabError):
    code = "duplicate_layer_name"


class EntityOutOfBoundsError(LayerlabError):
    code = "entity_out_of_bounds"


class MissingLayerError(LayerlabError):
    code = "missing_layer"


class MultiSpanParentError(LayerlabError):
    code = "multi_span_parent"


class LocalSpanOutOfRangeError(LayerlabError):
    code = "local_span_out_of_range"


class SchemaVersionError(LayerlabError):
    code = "schema_version_mismatch"


class MalformedInputError(LayerlabError):
    code = "malformed_input"


class NotAPdfError(LayerlabError):
    code = "not_a_pdf"


class EncryptedPdfError(LayerlabError):
    code = "encrypted_pdf"


class UnknownPredictorError(LayerlabError):
    code = "unknown_predictor"


class ConfigValidationError(LayerlabError):
    code = "config_validation_error"

    def __init__(self, message: str, fields: dict[str, str] | None = None):
        super().__init__(message)
        self.fields = fields or {}


class LexiconParseError(LayerlabError):
    code = "lexicon_parse_error"


class NoGeometryError(LayerlabError):
    code = "no_geometry_available"


class DegenerateGeometryError(LayerlabError):
    code = "degenerate_geometry"


class EmptyGridError(LayerlabError):
    code = "empty_grid"


class RemoteServiceError(LayerlabError):
    code = "http_error"


class InvalidResponseSchemaError(LayerlabError):
    code = "invalid_response_schema"
