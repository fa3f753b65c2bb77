"""JSON round-tripping for domain values carried in event payloads and files."""

from __future__ import annotations

from typing import Any

from .extract import Agreement, ConsensusRecord, FieldValue
from .model import (CategoryLabel, DocBundle, DocType, FieldKind, FieldSchema,
                    Page, Route, RoutingDecision, TableGrid, TextBlock)
from .parse import ParsedDoc
from .split import LogicalUnit
from .validate import CheckOutcome, CheckStatus, ValidationReport


def block_to_json(b: TextBlock) -> dict:
    return {"text": b.text, "x0": b.x0, "y0": b.y0, "x1": b.x1, "y1": b.y1,
            "font_size_hint": b.font_size_hint}


def block_from_json(d: dict) -> TextBlock:
    return TextBlock(d["text"], d["x0"], d["y0"], d["x1"], d["y1"],
                     d.get("font_size_hint", 10.0))


def table_to_json(t: TableGrid) -> dict:
    return {"rows": t.rows, "cols": t.cols, "cells": list(t.cells), "y0": t.y0}


def table_from_json(d: dict) -> TableGrid:
    return TableGrid(d["rows"], d["cols"], tuple(d["cells"]), d.get("y0", 0.5))


def page_to_json(p: Page) -> dict:
    return {"index": p.index, "blocks": [block_to_json(b) for b in p.blocks],
            "tables": [table_to_json(t) for t in p.tables],
            "footer_text": p.footer_text}


def page_from_json(d: dict) -> Page:
    return Page(d["index"], tuple(block_from_json(b) for b in d.get("blocks", [])),
                tuple(table_from_json(t) for t in d.get("tables", [])),
                d.get("footer_text"))


def bundle_to_json(b: DocBundle) -> dict:
    return {"doc_id": b.doc_id, "source_name": b.source_name,
            "pages": [page_to_json(p) for p in b.pages], "received_at": b.received_at}


def bundle_from_json(d: dict) -> DocBundle:
    return DocBundle(d["doc_id"], d.get("source_name", ""),
                     tuple(page_from_json(p) for p in d["pages"]),
                     d.get("received_at", ""))


def label_to_json(l: CategoryLabel) -> dict:
    return {"supplier_id": l.supplier_id, "doc_type": l.doc_type.value,
            "confidence": l.confidence}


def label_from_json(d: dict) -> CategoryLabel:
    return CategoryLabel(d["supplier_id"], DocType(d["doc_type"]), d["confidence"])


def unit_to_json(u: LogicalUnit) -> dict:
    return {"unit_id": u.unit_id, "page_range": list(u.page_range),
            "head_label": label_to_json(u.head_label)}


def unit_from_json(d: dict) -> LogicalUnit:
    return LogicalUnit(d["unit_id"], tuple(d["page_range"]),
                       label_from_json(d["head_label"]))


def parsed_to_json(p: ParsedDoc) -> dict:
    return {"unit_id": p.unit_id, "markdown": p.markdown,
            "heading_outline": [list(h) for h in p.heading_outline],
            "raw_token_count": p.raw_token_count,
            "parsed_token_count": p.parsed_token_count,
            "parser_config_version": p.parser_config_version}


def parsed_from_json(d: dict) -> ParsedDoc:
    return ParsedDoc(d["unit_id"], d["markdown"],
                     tuple((h[0], h[1]) for h in d["heading_outline"]),
                     d["raw_token_count"], d["parsed_token_count"],
                     d["parser_config_version"])


def field_value_to_json(v: FieldValue) -> dict:
    return {"field": v.field, "raw": v.raw, "normalized": v.normalized,
            "confidence": v.confidence, "backend_id": v.backend_id,
            "prompt_version": v.prompt_version, "kind": v.kind.value}


def field_value_from_json(d: dict) -> FieldValue:
    return FieldValue(d["field"], d["raw"], d["normalized"], d["confidence"],
                      d["backend_id"], d["prompt_version"], FieldKind(d["kind"]))


def record_to_json(r: ConsensusRecord) -> dict:
    return {"field": r.field, "chosen": field_value_to_json(r.chosen),
            "agreement": r.agreement.value, "flagged": r.flagged}


def record_from_json(d: dict) -> ConsensusRecord:
    return ConsensusRecord(d["field"], field_value_from_json(d["chosen"]),
                           Agreement(d["agreement"]), d["flagged"])


def outcome_to_json(o: CheckOutcome) -> dict:
    return {"check_id": o.check_id, "status": o.status.value, "detail": o.detail,
            "affected_fields": list(o.affected_fields)}


def outcome_from_json(d: dict) -> CheckOutcome:
    return CheckOutcome(d["check_id"], CheckStatus(d["status"]), d["detail"],
                        tuple(d["affected_fields"]))


def routing_to_json(r: RoutingDecision) -> dict:
    return {"route": r.route.value, "reasons": list(r.reasons)}


def routing_from_json(d: dict) -> RoutingDecision:
    return RoutingDecision(Route(d["route"]), tuple(d["reasons"]))


def report_to_json(r: ValidationReport) -> dict:
    return {"doc_id": r.doc_id,
            "outcomes": [outcome_to_json(o) for o in r.outcomes],
            "adjusted": [field_value_to_json(v) for v in r.adjusted],
            "routing": routing_to_json(r.routing)}


def report_from_json(d: dict) -> ValidationReport:
    return ValidationReport(d["doc_id"],
                            tuple(outcome_from_json(o) for o in d["outcomes"]),
                            tuple(field_value_from_json(v) for v in d["adjusted"]),
                            routing_from_json(d["routing"]))


def schema_to_json(schema: list[FieldSchema]) -> list[dict]:
    return [{"name": f.name, "kind": f.kind.value, "required": f.required,
             "admissible_values": sorted(f.admissible_values) if f.admissible_values else None}
            for f in schema]


def schema_from_json(items: list[dict]) -> list[FieldSchema]:
    return [FieldSchema(d["name"], FieldKind(d["kind"]), d.get("required", False),
                        frozenset(d["admissible_values"]) if d.get("admissible_values") else None)
            for d in items]
