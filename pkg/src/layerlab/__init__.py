"""Scientific-PDF extraction workbench: layered documents, predictors, service."""

__version__ = "0.1.0"
