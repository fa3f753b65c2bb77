"""Partition a multi-document bundle into logical units (individual documents).

Boundary rule cascade, in priority order, for page i > 0:
  1. footer pagination "current = 1" starts a new unit; "current > 1" continues
  2. head classification with confidence >= split_confidence and a concrete
     doc_type starts a new unit
  3. otherwise the page continues the current unit
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .model import CategoryLabel, DocBundle, DocType, PipelineConfig

AMBIGUOUS_PAGE_LIMIT = 10

_PAGINATION_PATTERNS = [
    re.compile(r"page\s+(\d+)\s+of\s+(\d+)", re.IGNORECASE),
    re.compile(r"pag\.?\s*(\d+)\s*/\s*(\d+)", re.IGNORECASE),
    re.compile(r"(?<![\d/.,-])(\d+)\s+/\s+(\d+)(?![\d/.,-])"),
]


@dataclass(frozen=True)
class LogicalUnit:
    unit_id: str
    page_range: tuple[int, int]  # inclusive
    head_label: CategoryLabel


def parse_pagination(footer_text: Optional[str]) -> Optional[tuple[int, int]]:
    if not footer_text:
        return None
    for pattern in _PAGINATION_PATTERNS:
        m = pattern.search(footer_text)
        if m:
            return int(m.group(1)), int(m.group(2))
    return None


def detect_boundaries(bundle: DocBundle, page_labels: list[CategoryLabel],
                      config: PipelineConfig) -> list[LogicalUnit]:
    if len(page_labels) != len(bundle.pages):
        raise ValueError("need exactly one label per page")
    starts = [0]
    for i in range(1, len(bundle.pages)):
        pagination = parse_pagination(bundle.pages[i].footer_text)
        if pagination is not None:
            if pagination[0] == 1:
                starts.append(i)
            continue
        label = page_labels[i]
        if label.confidence >= config.split_confidence and label.doc_type != DocType.OTHER:
            starts.append(i)
    units = []
    for k, start in enumerate(starts):
        end = (starts[k + 1] - 1) if k + 1 < len(starts) else len(bundle.pages) - 1
        unit_id = bundle.doc_id if len(starts) == 1 else f"{bundle.doc_id}#u{k}"
        units.append(LogicalUnit(unit_id, (start, end), page_labels[start]))
    return units


def is_ambiguous(bundle: DocBundle, units: list[LogicalUnit],
                 page_labels: list[CategoryLabel], config: PipelineConfig) -> bool:
    """Long bundles with no head signal past page 0 go to human review, not a guess."""
    if len(units) > 1 or len(bundle.pages) <= AMBIGUOUS_PAGE_LIMIT:
        return False
    for i in range(1, len(bundle.pages)):
        if parse_pagination(bundle.pages[i].footer_text) is not None:
            return False
        if page_labels[i].confidence >= config.split_confidence:
            return False
    return True
