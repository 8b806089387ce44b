"""Tweet emotion pipeline: normalization, affect features, multi-label models, metrics, trends, aspects."""

__version__ = "0.1.0"
