"""Prompt fine-tuning with feedback inheritance.

Human corrections become structured feedback; feedback mutates the category's
prompt lineage (semantic errors) or the parser configuration (layout errors),
and schedules re-extraction for similar pending documents.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .model import MISSING, DocType, FieldKind, FieldSchema, Stage
from .normalize import normalize_value
from .parse import LayoutHint, ParserConfig
from .prompts import PromptExample, PromptVersion

EXCERPT_CONTEXT_LINES = 2


class ErrorClass(str, Enum):
    MISSING = "missing"
    FORMAT = "format"
    VALUE = "value"
    LAYOUT = "layout"


@dataclass(frozen=True)
class CorrectionFeedback:
    feedback_id: str
    doc_id: str
    field: str
    original_value: str  # possibly MISSING
    corrected_value: str
    doc_type: DocType
    supplier_id: str
    reviewer_id: str
    ts: str

    @property
    def category(self) -> tuple[str, str]:
        return (self.supplier_id, self.doc_type.value)


@dataclass(frozen=True)
class ErrorPattern:
    feedback_id: str
    error_class: ErrorClass
    description: str


def is_noop_correction(fb: CorrectionFeedback, kind: FieldKind) -> bool:
    """A correction must change the normalized value unless the original was missing."""
    if fb.original_value == MISSING:
        return False
    return normalize_value(kind, fb.original_value) == normalize_value(kind, fb.corrected_value)


def classify_error(fb: CorrectionFeedback, schema: list[FieldSchema]) -> ErrorPattern:
    kind = next((f.kind for f in schema if f.name == fb.field), FieldKind.TEXT)
    if fb.original_value == MISSING:
        return ErrorPattern(fb.feedback_id, ErrorClass.MISSING,
                            f"{fb.field} was not extracted; correct value {fb.corrected_value!r}")
    orig_norm = normalize_value(kind, fb.original_value)
    corr_norm = normalize_value(kind, fb.corrected_value)
    if orig_norm is not None and orig_norm == corr_norm and fb.original_value != fb.corrected_value:
        return ErrorPattern(fb.feedback_id, ErrorClass.FORMAT,
                            f"{fb.field} value correct but formatted {fb.original_value!r} "
                            f"instead of {fb.corrected_value!r}")
    if kind == FieldKind.LINE_ITEMS:
        return ErrorPattern(fb.feedback_id, ErrorClass.LAYOUT,
                            f"{fb.field} table rows misread (reorder/merge)")
    return ErrorPattern(fb.feedback_id, ErrorClass.VALUE,
                        f"{fb.field} extracted {fb.original_value!r}, "
                        f"correct value {fb.corrected_value!r}")


_FORMAT_INSTRUCTIONS = {
    FieldKind.DATE: "dates must be ISO-8601 (YYYY-MM-DD)",
    FieldKind.MONEY: "monetary amounts must be a decimal number followed by the currency code",
    FieldKind.PERCENTAGE: "percentages must be plain numbers without the % sign",
    FieldKind.CURRENCY_CODE: "currency codes must be upper-case 3-letter ISO 4217 codes",
    FieldKind.TAX_ID: "tax identifiers must contain no spaces or separators",
    FieldKind.QUANTITY: "quantities must be plain numbers",
    FieldKind.TEXT: "text values must be reproduced exactly as printed",
    FieldKind.LINE_ITEMS: "line items must be returned row by row in document order",
}


def markdown_excerpt(markdown: str, needle_candidates: list[str]) -> str:
    """±2 lines of context around the first line mentioning the field's value."""
    lines = markdown.splitlines()
    hit = 0
    for needle in needle_candidates:
        if not needle or needle == MISSING:
            continue
        for i, line in enumerate(lines):
            if needle in line:
                hit = i
                break
        else:
            continue
        break
    lo = max(0, hit - EXCERPT_CONTEXT_LINES)
    hi = min(len(lines), hit + EXCERPT_CONTEXT_LINES + 1)
    return "\n".join(lines[lo:hi])


def apply_feedback(fb: CorrectionFeedback, pattern: ErrorPattern,
                   current: PromptVersion, parser_cfg: ParserConfig,
                   parsed_markdown: str,
                   schema: list[FieldSchema]) -> Union[PromptVersion, ParserConfig]:
    """Layout errors bump the parser config; everything else grows the prompt lineage."""
    if pattern.error_class == ErrorClass.LAYOUT:
        hint = LayoutHint(category=fb.category, note=pattern.description)
        return parser_cfg.with_hint(hint)
    kind = next((f.kind for f in schema if f.name == fb.field), FieldKind.TEXT)
    excerpt = markdown_excerpt(parsed_markdown, [fb.corrected_value, fb.original_value, fb.field])
    example = PromptExample(excerpt=excerpt, field=fb.field, value=fb.corrected_value)
    instructions = current.instruction_lines
    if pattern.error_class == ErrorClass.FORMAT:
        line = _FORMAT_INSTRUCTIONS[kind]
        if line not in instructions:
            instructions = instructions + (line,)
    return current.child(
        instruction_lines=instructions,
        examples=current.examples + (example,),
        created_from=(fb.feedback_id,),
    )


# --- inheritance ------------------------------------------------------------

_INHERIT_STAGES = {Stage.INGESTED, Stage.CLASSIFIED, Stage.SPLIT,
                   Stage.PARSED, Stage.EXTRACTED}


@dataclass(frozen=True)
class PendingDocView:
    doc_id: str
    category: tuple[str, str]
    stage: Stage
    review_fields: frozenset[str] = frozenset()  # fields that put the doc in review


@dataclass(frozen=True)
class ReextractionTask:
    doc_id: str
    field: str
    version_id: str
    round: int


def inherit(fb: CorrectionFeedback, new_version: PromptVersion,
            pending: list[PendingDocView], round_counter: int = 1) -> list[ReextractionTask]:
    """Similar characteristics = identical category; in-review documents only
    when the corrected field is among their flagged fields."""
    tasks = []
    for doc in pending:
        if doc.doc_id == fb.doc_id or doc.category != fb.category:
            continue
        if doc.stage in _INHERIT_STAGES or (
                doc.stage == Stage.IN_REVIEW and fb.field in doc.review_fields):
            tasks.append(ReextractionTask(doc.doc_id, fb.field,
                                          new_version.version_id, round_counter))
    return tasks
