"""Format and atomic consistency checks, confidence elevation, and routing.

Checks use only relationships internal to the document (no external master
data). Canonical field names: subtotal, tax_amount, total_amount,
invoice_date, due_date, vat_rate, currency, country, supplier_tax_id,
line_items.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources

from .extract import ConsensusRecord, FieldValue
from .model import (FieldKind, FieldSchema, PipelineConfig, Route,
                    RoutingDecision)
from .normalize import money_minor_units

ELEVATED_CONFIDENCE = 0.99

with resources.files("madp.data").joinpath("iso4217.json").open("r") as _fh:
    ISO_4217_CODES: frozenset[str] = frozenset(json.load(_fh))

_IT_TAX_ID = re.compile(r"^(IT)?\d{11}$")
_EU_TAX_ID = re.compile(r"^[A-Z]{2}[0-9A-Z]{8,12}$")


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CheckOutcome:
    check_id: str
    status: CheckStatus
    detail: str
    affected_fields: tuple[str, ...]


@dataclass(frozen=True)
class ValidationReport:
    doc_id: str
    outcomes: tuple[CheckOutcome, ...]
    adjusted: tuple[FieldValue, ...]
    routing: RoutingDecision


def _present(fields: dict[str, FieldValue], name: str) -> bool:
    return name in fields and not fields[name].is_missing


def run_checks(fields: dict[str, FieldValue], schema: list[FieldSchema],
               config: PipelineConfig) -> list[CheckOutcome]:
    outcomes: list[CheckOutcome] = []

    def emit(check_id: str, status: CheckStatus, detail: str, affected: tuple[str, ...]):
        if check_id not in config.disabled_checks:
            outcomes.append(CheckOutcome(check_id, status, detail, affected))

    country = fields[
        "country"].normalized if _present(fields, "country") else config.default_country

    # format checks
    for f in schema:
        if f.kind in (FieldKind.TEXT, FieldKind.LINE_ITEMS):
            continue
        check_id = f"format:{f.kind.value}:{f.name}"
        if f.name not in fields:
            continue
        value = fields[f.name]
        if value.is_missing:
            if value.raw != value.normalized:  # raw present but unparseable
                emit(check_id, CheckStatus.FAIL,
                     f"{f.name}={value.raw!r} does not parse as {f.kind.value}", (f.name,))
            else:
                emit(check_id, CheckStatus.SKIPPED, f"{f.name} missing", (f.name,))
            continue
        if f.kind == FieldKind.TAX_ID:
            pattern = _IT_TAX_ID if country == "IT" else _EU_TAX_ID
            status = CheckStatus.PASS if pattern.match(value.normalized) else CheckStatus.FAIL
            emit(check_id, status, f"{f.name}={value.normalized}", (f.name,))
        else:
            emit(check_id, CheckStatus.PASS, f"{f.name} parses as {f.kind.value}", (f.name,))

    tol = config.arithmetic_tolerance_minor_units

    # arithmetic: subtotal + tax = total within tolerance (minor units)
    triple = ("subtotal", "tax_amount", "total_amount")
    if all(_present(fields, n) for n in triple):
        sub, tax, tot = (money_minor_units(fields[n].normalized) for n in triple)
        diff = abs(sub + tax - tot)
        status = CheckStatus.PASS if diff <= tol else CheckStatus.FAIL
        emit("arithmetic:subtotal_tax_total", status,
             f"|{sub} + {tax} - {tot}| = {diff} minor units (tolerance {tol})", triple)
    else:
        emit("arithmetic:subtotal_tax_total", CheckStatus.SKIPPED,
             "subtotal/tax_amount/total_amount not all present", triple)

    # line-item reconciliation: sum of line totals vs subtotal
    if _present(fields, "line_items") and _present(fields, "subtotal"):
        rows = json.loads(fields["line_items"].normalized)
        totals = [money_minor_units(str(r.get("line_total", "0")))
                  for r in rows if isinstance(r, dict)]
        sub = money_minor_units(fields["subtotal"].normalized)
        bound = tol * max(1, len(totals))
        diff = abs(sum(totals) - sub)
        status = CheckStatus.PASS if diff <= bound else CheckStatus.FAIL
        emit("line_items:reconciliation", status,
             f"|sum(line_total) - subtotal| = {diff} (bound {bound})",
             ("line_items", "subtotal"))
    elif "line_items" in fields or "subtotal" in fields:
        emit("line_items:reconciliation", CheckStatus.SKIPPED,
             "line_items or subtotal missing", ("line_items", "subtotal"))

    # cross-field: invoice date precedes (or equals) due date
    if _present(fields, "invoice_date") and _present(fields, "due_date"):
        inv, due = fields["invoice_date"].normalized, fields["due_date"].normalized
        status = CheckStatus.PASS if inv <= due else CheckStatus.FAIL
        emit("dates:ordering", status, f"invoice_date {inv} vs due_date {due}",
             ("invoice_date", "due_date"))
    elif "invoice_date" in fields or "due_date" in fields:
        emit("dates:ordering", CheckStatus.SKIPPED, "invoice_date or due_date missing",
             ("invoice_date", "due_date"))

    # domain: VAT rate legal for the country
    if _present(fields, "vat_rate"):
        rate = float(fields["vat_rate"].normalized)
        legal = config.vat_table.get(country)
        if legal is None:
            emit("vat:legal_rate", CheckStatus.SKIPPED,
                 f"no VAT table for country {country}", ("vat_rate",))
        else:
            status = CheckStatus.PASS if rate in legal else CheckStatus.FAIL
            emit("vat:legal_rate", status,
                 f"vat_rate {rate} vs {sorted(legal)} for {country}", ("vat_rate",))
    elif "vat_rate" in fields:
        emit("vat:legal_rate", CheckStatus.SKIPPED, "vat_rate missing", ("vat_rate",))

    # domain: currency code in ISO 4217
    if _present(fields, "currency"):
        code = fields["currency"].normalized
        status = CheckStatus.PASS if code in ISO_4217_CODES else CheckStatus.FAIL
        emit("currency:iso4217", status, f"currency {code}", ("currency",))
    elif "currency" in fields:
        emit("currency:iso4217", CheckStatus.SKIPPED, "currency missing", ("currency",))

    return outcomes


def elevate_confidence(fields: dict[str, FieldValue],
                       outcomes: list[CheckOutcome]) -> dict[str, FieldValue]:
    """Raise to near certainty every field covered only by passing checks."""
    passed: set[str] = set()
    failed: set[str] = set()
    for o in outcomes:
        if o.status == CheckStatus.PASS:
            passed.update(o.affected_fields)
        elif o.status == CheckStatus.FAIL:
            failed.update(o.affected_fields)
    adjusted = {}
    for name, value in fields.items():
        if name in passed and name not in failed:
            adjusted[name] = replace(value, confidence=max(value.confidence, ELEVATED_CONFIDENCE))
        else:
            adjusted[name] = value
    return adjusted


def route(records: list[ConsensusRecord], adjusted: dict[str, FieldValue],
          outcomes: list[CheckOutcome], schema: list[FieldSchema],
          config: PipelineConfig, category: tuple[str, str]) -> RoutingDecision:
    reasons: list[str] = []
    for o in outcomes:
        if o.status == CheckStatus.FAIL:
            reasons.append(f"check failed: {o.check_id} ({o.detail})")
    for r in records:
        if r.flagged:
            reasons.append(f"consensus split on {r.field}")
    for f in schema:
        if not f.required:
            continue
        value = adjusted.get(f.name)
        threshold = config.effective_threshold(f.name, category)
        if value is None or value.is_missing:
            reasons.append(f"required field {f.name} missing")
        elif value.confidence < threshold:
            reasons.append(
                f"{f.name} confidence {value.confidence:.2f} below threshold {threshold:.2f}")
    if reasons:
        return RoutingDecision(Route.HUMAN_REVIEW, tuple(reasons))
    return RoutingDecision(Route.AUTO_ACCEPT, ())


def validate_document(doc_id: str, records: list[ConsensusRecord],
                      schema: list[FieldSchema], config: PipelineConfig,
                      category: tuple[str, str]) -> ValidationReport:
    fields = {r.field: r.chosen for r in records}
    outcomes = run_checks(fields, schema, config)
    adjusted = elevate_confidence(fields, outcomes)
    decision = route(records, adjusted, outcomes, schema, config, category)
    return ValidationReport(
        doc_id=doc_id,
        outcomes=tuple(outcomes),
        adjusted=tuple(adjusted[name] for name in sorted(adjusted)),
        routing=decision,
    )
