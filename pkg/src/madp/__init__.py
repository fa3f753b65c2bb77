"""Multi-agent document processing pipeline with human-in-the-loop review.

Five processing stages (classification, splitting, layout parsing, LLM
extraction with consensus, validation/routing) over an event-sourced runtime,
plus prompt versioning driven by human corrections and a review HTTP service.
"""

from .model import (DocBundle, DocType, FieldKind, FieldSchema, MISSING, Page,
                    PipelineConfig, Route, TableGrid, TextBlock, load_config)
from .runtime import Runtime

__version__ = "0.1.0"

__all__ = [
    "DocBundle", "DocType", "FieldKind", "FieldSchema", "MISSING", "Page",
    "PipelineConfig", "Route", "Runtime", "TableGrid", "TextBlock",
    "load_config", "__version__",
]
