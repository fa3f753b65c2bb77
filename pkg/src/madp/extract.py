"""Schema-driven extraction and consensus voting over parallel backends."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

from .backends import Backend
from .model import MISSING, FieldKind, FieldSchema
from .normalize import equality_key, normalize_value
from .prompts import PromptBundle

UNANIMOUS_CAP = 0.99

FORMAT_REMINDER = (
    "\n\nReminder: respond with ONLY a single JSON object of the form "
    '{"fields": {"<name>": {"value": <value>, "confidence": <0..1>}}}.'
)


class ExtractionFailure(RuntimeError):
    """Backend could not produce parseable JSON; route the document to review."""


@dataclass(frozen=True)
class FieldValue:
    field: str
    raw: str
    normalized: str  # canonical form, or MISSING
    confidence: float
    backend_id: str
    prompt_version: str
    kind: FieldKind = FieldKind.TEXT

    @property
    def is_missing(self) -> bool:
        return self.normalized == MISSING


class Agreement(str, Enum):
    UNANIMOUS = "unanimous"
    MAJORITY = "majority"
    SPLIT = "split"
    SINGLE = "single"


@dataclass(frozen=True)
class ConsensusRecord:
    field: str
    chosen: FieldValue
    agreement: Agreement
    flagged: bool


def _missing_value(f: FieldSchema, backend_id: str, version: str) -> FieldValue:
    return FieldValue(f.name, MISSING, MISSING, 0.0, backend_id, version, f.kind)


def extract(prompt: PromptBundle, backend: Backend, schema: list[FieldSchema],
            doc_id: str) -> list[FieldValue]:
    """Run one backend and validate its JSON response against the schema.

    Unknown fields are dropped; missing required fields come back as explicit
    missing markers at confidence 0. One repair retry on non-JSON output.
    """
    meta = {"doc_id": doc_id, "prompt_version": prompt.version_id}
    text = backend.complete(prompt.rendered_text, meta)
    data = _try_json(text)
    if data is None:
        text = backend.complete(prompt.rendered_text + FORMAT_REMINDER, meta)
        data = _try_json(text)
        if data is None:
            raise ExtractionFailure(
                f"{backend.backend_id} returned non-JSON twice for {doc_id}")
    raw_fields = data.get("fields", {}) if isinstance(data, dict) else {}
    by_name = {f.name: f for f in schema}
    out: list[FieldValue] = []
    for f in schema:
        entry = raw_fields.get(f.name)
        if not isinstance(entry, dict) or entry.get("value") is None:
            if f.required:
                out.append(_missing_value(f, backend.backend_id, prompt.version_id))
            continue
        raw_value = entry["value"]
        confidence = float(entry.get("confidence", 0.0))
        confidence = min(1.0, max(0.0, confidence))
        normalized = normalize_value(f.kind, raw_value)
        if normalized is None:
            normalized = MISSING  # unparseable typed value: keep raw, mark missing
            confidence = 0.0
        raw_str = raw_value if isinstance(raw_value, str) else json.dumps(raw_value)
        out.append(FieldValue(f.name, raw_str, normalized, confidence,
                              backend.backend_id, prompt.version_id, f.kind))
    assert all(v.field in by_name for v in out)
    return out


def _try_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return None


def consensus(results: list[tuple[str, list[FieldValue]]]) -> list[ConsensusRecord]:
    """Merge parallel backend results per field.

    unanimous -> noisy-or confidence capped at 0.99
    majority  -> majority value at the max agreeing confidence
    split     -> highest-confidence value, flagged for review
                 (ties broken by lexicographic backend_id)
    """
    if not results:
        raise ValueError("consensus needs at least one backend result")
    per_field: dict[str, list[FieldValue]] = {}
    for _backend_id, values in results:
        for v in values:
            per_field.setdefault(v.field, []).append(v)
    records = []
    for field_name in sorted(per_field):
        values = per_field[field_name]
        records.append(_vote(field_name, values))
    return records


def _best(values: list[FieldValue]) -> FieldValue:
    return min(values, key=lambda v: (-v.confidence, v.backend_id))


def _vote(field_name: str, values: list[FieldValue]) -> ConsensusRecord:
    if len(values) == 1:
        return ConsensusRecord(field_name, values[0], Agreement.SINGLE, False)
    groups: dict[str, list[FieldValue]] = {}
    for v in values:
        key = MISSING if v.is_missing else equality_key(v.kind, v.normalized)
        groups.setdefault(key, []).append(v)
    if len(groups) == 1:
        product = 1.0
        for v in values:
            product *= (1.0 - v.confidence)
        combined = min(UNANIMOUS_CAP, 1.0 - product)
        chosen = replace(_best(values), confidence=combined)
        return ConsensusRecord(field_name, chosen, Agreement.UNANIMOUS, False)
    largest = max(groups.values(), key=len)
    if len(largest) * 2 > len(values):
        chosen = _best(largest)
        return ConsensusRecord(field_name, chosen, Agreement.MAJORITY, False)
    chosen = _best(values)
    return ConsensusRecord(field_name, chosen, Agreement.SPLIT, True)
