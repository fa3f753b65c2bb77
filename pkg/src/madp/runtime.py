"""Pipeline orchestrator and event-sourced state.

Every state change is appended to a JSONL event log and then applied to the
in-memory state through the same fold used on replay, so killing the process
and replaying the log reproduces queue, stats, and prompt heads exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from . import codec
from .backends import Backend
from .classify import CategorySignature, classify
from .events import Event, EventLog
from .extract import (ConsensusRecord, ExtractionFailure, FieldValue,
                      consensus, extract)
from .model import (MISSING, CategoryLabel, DocBundle, DocType, FieldSchema,
                    PipelineConfig, PipelineState, Route, RoutingDecision,
                    Stage, StageOutput, UNKNOWN_LABEL, advance_state)
from .normalize import normalize_value
from .parse import ParsedDoc, ParserConfig, passthrough_parse, render_markdown
from .pftfi import (CorrectionFeedback, ErrorClass, PendingDocView,
                    apply_feedback, classify_error, inherit,
                    is_noop_correction)
from .prompts import PromptStore, PromptVersion, assemble_prompt, version_from_json, version_to_json
from .split import detect_boundaries, is_ambiguous
from .validate import ValidationReport, validate_document

DEFAULT_INVOICE_SCHEMA: list[FieldSchema] = codec.schema_from_json([
    {"name": "invoice_number", "kind": "text", "required": True},
    {"name": "invoice_date", "kind": "date", "required": True},
    {"name": "due_date", "kind": "date", "required": True},
    {"name": "subtotal", "kind": "money", "required": True},
    {"name": "tax_amount", "kind": "money", "required": True},
    {"name": "total_amount", "kind": "money", "required": True},
    {"name": "vat_rate", "kind": "percentage", "required": True},
    {"name": "currency", "kind": "currency_code", "required": True},
    {"name": "supplier_tax_id", "kind": "tax_id", "required": True},
    {"name": "notes", "kind": "text", "required": False},
    {"name": "line_items", "kind": "line_items", "required": False},
])

DEFAULT_DELIVERY_NOTE_SCHEMA: list[FieldSchema] = codec.schema_from_json([
    {"name": "document_number", "kind": "text", "required": True},
    {"name": "delivery_date", "kind": "date", "required": True},
    {"name": "supplier_tax_id", "kind": "tax_id", "required": True},
    {"name": "notes", "kind": "text", "required": False},
    {"name": "line_items", "kind": "line_items", "required": False},
])

DEFAULT_SCHEMAS: dict[str, list[FieldSchema]] = {
    "invoice": DEFAULT_INVOICE_SCHEMA,
    "delivery_note": DEFAULT_DELIVERY_NOTE_SCHEMA,
    "other": DEFAULT_INVOICE_SCHEMA,
}


class UnknownDocumentError(LookupError):
    pass


class TaskStateError(RuntimeError):
    pass


class UnknownFieldError(ValueError):
    pass


class NoopCorrectionError(ValueError):
    pass


@dataclass
class UnitState:
    doc_id: str
    bundle_id: str
    page_range: tuple[int, int]
    label: CategoryLabel
    state: PipelineState
    parsed: Optional[ParsedDoc] = None
    results: list[tuple[str, list[FieldValue]]] = field(default_factory=list)
    records: list[ConsensusRecord] = field(default_factory=list)
    report: Optional[ValidationReport] = None
    prompt_version: str = "v1"
    ambiguous_split: bool = False

    @property
    def category(self) -> tuple[str, str]:
        if self.label.doc_type == DocType.OTHER:
            return ("unknown", "other")
        return self.label.category



@dataclass
class ReviewTask:
    doc_id: str
    category: tuple[str, str]
    status: str  # pending | in_progress | resolved
    opened_at: str
    reasons: tuple[str, ...] = ()
    resolved_at: Optional[str] = None
    review_seconds: Optional[float] = None
    resolution: Optional[str] = None


@dataclass(frozen=True)
class PipelineStats:
    total_docs: int
    ai_completed: int
    fallback_docs: int
    review_rate: Optional[float]
    automation_rate: Optional[float]
    avg_review_seconds: Optional[float]


class Runtime:
    """Owns the event log, document states, review queue, and prompt lineages."""

    def __init__(self, workdir: Optional[Path] = None,
                 config: Optional[PipelineConfig] = None,
                 parser_config: Optional[ParserConfig] = None,
                 backends: Optional[list[Backend]] = None,
                 signatures: Optional[list[CategorySignature]] = None,
                 schemas: Optional[dict[str, list[FieldSchema]]] = None,
                 ablate: frozenset[str] = frozenset(),
                 clock=None):
        self.workdir = Path(workdir) if workdir is not None else None
        self.config = config or PipelineConfig()
        self.parser_config = parser_config or ParserConfig()
        self.backends = backends or []
        self.signatures = signatures or []
        self.schemas = schemas or DEFAULT_SCHEMAS
        self.ablate = ablate
        log_path = self.workdir / "events.jsonl" if self.workdir else None
        kwargs = {"clock": clock} if clock else {}
        self.log = EventLog(log_path, **kwargs)

        self.bundles: dict[str, DocBundle] = {}
        self.page_labels: dict[str, list[CategoryLabel]] = {}
        self.units: dict[str, UnitState] = {}
        self.tasks: dict[str, ReviewTask] = {}
        self.prompts = PromptStore(self.workdir / "prompts" if self.workdir else None)
        self._feedback_seq = itertools.count(1)
        self._replay_existing()

    # --- event plumbing -----------------------------------------------------

    def _replay_existing(self) -> None:
        for event in self.log.read():
            self._apply(event)

    def _emit(self, kind: str, doc_id: str, payload: dict) -> Event:
        event = self.log.append(kind, doc_id, payload)
        self._apply(event)
        return event

    def _apply(self, event: Event) -> None:
        handler = getattr(self, f"_on_{event.event_kind}", None)
        if handler is None:
            raise ValueError(f"unknown event kind {event.event_kind!r}")
        handler(event)

    # --- fold handlers ------------------------------------------------------

    def _on_bundle_ingested(self, event: Event) -> None:
        bundle = codec.bundle_from_json(event.payload["bundle"])
        if bundle.doc_id in self.bundles:
            raise ValueError(f"duplicate doc_id {bundle.doc_id}")
        self.bundles[bundle.doc_id] = bundle

    def _on_bundle_classified(self, event: Event) -> None:
        self.page_labels[event.doc_id] = [
            codec.label_from_json(l) for l in event.payload["labels"]]

    def _on_bundle_split(self, event: Event) -> None:
        for u in event.payload["units"]:
            unit = codec.unit_from_json(u)
            label = unit.head_label
            state = PipelineState(unit.unit_id)
            state = advance_state(state, StageOutput(Stage.CLASSIFIED,
                                                     {"label": label.supplier_id}))
            state = advance_state(state, StageOutput(Stage.SPLIT,
                                                     {"page_range": list(unit.page_range)}))
            self.units[unit.unit_id] = UnitState(
                doc_id=unit.unit_id, bundle_id=event.doc_id,
                page_range=unit.page_range, label=label, state=state,
                ambiguous_split=event.payload.get("ambiguous", False))

    def _on_unit_parsed(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.parsed = codec.parsed_from_json(event.payload["parsed"])
        unit.state = advance_state(unit.state, StageOutput(
            Stage.PARSED, {"markdown": unit.parsed.markdown}))

    def _on_unit_extracted(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        self.prompts.head(unit.category)  # materialize v1 on replay too
        unit.prompt_version = event.payload["prompt_version"]
        unit.results = [
            (r["backend_id"], [codec.field_value_from_json(v) for v in r["values"]])
            for r in event.payload["results"]]
        unit.state = advance_state(unit.state, StageOutput(Stage.EXTRACTED, {}))

    def _on_unit_validated(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.records = [codec.record_from_json(r) for r in event.payload["records"]]
        unit.report = codec.report_from_json(event.payload["report"])
        unit.state = advance_state(unit.state, StageOutput(
            Stage.VALIDATED, {"route": event.payload["route"]}))

    def _on_unit_finalized(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.state = advance_state(unit.state, None)

    def _on_review_opened(self, event: Event) -> None:
        self.tasks[event.doc_id] = ReviewTask(
            doc_id=event.doc_id,
            category=tuple(event.payload["category"]),
            status="pending",
            opened_at=event.ts,
            reasons=tuple(event.payload["reasons"]))

    def _on_correction(self, event: Event) -> None:
        task = self.tasks.get(event.doc_id)
        if task is not None:
            task.status = "in_progress"

    def _on_prompt_version(self, event: Event) -> None:
        version = version_from_json(event.payload["version"])
        self.prompts.head(version.category)  # seed v1 before committing children
        if self.prompts.head(version.category).version_id != version.version_id:
            self.prompts.commit(version)

    def _on_parser_config(self, event: Event) -> None:
        from .parse import LayoutHint
        hint = event.payload["hint"]
        self.parser_config = self.parser_config.with_hint(
            LayoutHint(tuple(hint["category"]), hint["note"]))

    def _on_field_corrected(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.records = [codec.record_from_json(r) for r in event.payload["records"]]
        unit.report = codec.report_from_json(event.payload["report"])

    def _on_inheritance(self, event: Event) -> None:
        pass  # observability only; the paired reextracted event carries state

    def _on_reextracted(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.prompt_version = event.payload["prompt_version"]
        unit.results = [
            (r["backend_id"], [codec.field_value_from_json(v) for v in r["values"]])
            for r in event.payload["results"]]
        unit.records = [codec.record_from_json(r) for r in event.payload["records"]]
        unit.report = codec.report_from_json(event.payload["report"])
        route = Route(event.payload["route"])
        state = PipelineState(unit.doc_id, Stage.VALIDATED,
                              {"markdown": unit.parsed.markdown if unit.parsed else ""},
                              route)
        unit.state = advance_state(state, None)
        if route == Route.AUTO_ACCEPT and event.doc_id in self.tasks:
            task = self.tasks[event.doc_id]
            if task.status != "resolved":
                task.status = "resolved"
                task.resolved_at = event.ts
                task.resolution = "auto_after_inheritance"

    def _on_confirmed(self, event: Event) -> None:
        unit = self.units[event.doc_id]
        unit.records = [
            replace(r, chosen=replace(r.chosen, confidence=1.0), flagged=False)
            for r in unit.records]
        if unit.report is not None:
            unit.report = replace(
                unit.report,
                adjusted=tuple(replace(v, confidence=1.0) for v in unit.report.adjusted),
                routing=RoutingDecision(Route.AUTO_ACCEPT, ("human confirmation",)))
        state = PipelineState(unit.doc_id, Stage.VALIDATED, {}, Route.AUTO_ACCEPT)
        unit.state = advance_state(state, None)
        task = self.tasks[event.doc_id]
        task.status = "resolved"
        task.resolved_at = event.ts
        task.review_seconds = event.payload.get("review_seconds")
        task.resolution = "confirmed"

    def _on_fallback_routed(self, event: Event) -> None:
        pass  # terminal stage already carried by unit_finalized

    # --- pipeline -----------------------------------------------------------

    def schema_for(self, unit: UnitState) -> list[FieldSchema]:
        doc_type = unit.label.doc_type.value
        return self.schemas.get(doc_type, DEFAULT_INVOICE_SCHEMA)

    def ingest(self, bundle: DocBundle) -> None:
        self._emit("bundle_ingested", bundle.doc_id, {"bundle": codec.bundle_to_json(bundle)})

    def run_all(self) -> list[str]:
        processed = []
        for bundle_id in list(self.bundles):
            if bundle_id not in self.page_labels:
                self.run_bundle(bundle_id)
                processed.append(bundle_id)
        return processed

    def run_bundle(self, bundle_id: str) -> list[str]:
        bundle = self.bundles[bundle_id]
        if "classificator" in self.ablate:
            labels = [UNKNOWN_LABEL for _ in bundle.pages]
        else:
            labels = [classify(p, self.signatures, self.config) for p in bundle.pages]
        self._emit("bundle_classified", bundle_id,
                   {"labels": [codec.label_to_json(l) for l in labels]})
        if "splitter" in self.ablate:
            from .split import LogicalUnit
            units = [LogicalUnit(bundle_id, (0, len(bundle.pages) - 1), labels[0])]
            ambiguous = False
        else:
            units = detect_boundaries(bundle, labels, self.config)
            ambiguous = is_ambiguous(bundle, units, labels, self.config)
        self._emit("bundle_split", bundle_id,
                   {"units": [codec.unit_to_json(u) for u in units], "ambiguous": ambiguous})
        for unit in units:
            self._process_unit(self.units[unit.unit_id])
        return [u.unit_id for u in units]

    def _process_unit(self, unit: UnitState) -> None:
        bundle = self.bundles[unit.bundle_id]
        start, end = unit.page_range
        pages = list(bundle.pages[start:end + 1])
        if "parser" in self.ablate:
            parsed = passthrough_parse(unit.doc_id, pages, self.parser_config)
        else:
            parsed = render_markdown(unit.doc_id, pages, self.parser_config)
        self._emit("unit_parsed", unit.doc_id, {"parsed": codec.parsed_to_json(parsed)})

        schema = self.schema_for(unit)
        version = self.prompts.head(unit.category)
        prompt = assemble_prompt(schema, parsed, version)
        results, failures = self._run_backends(unit.doc_id, prompt, schema)
        self._emit("unit_extracted", unit.doc_id, {
            "prompt_version": version.version_id,
            "results": [{"backend_id": bid,
                         "values": [codec.field_value_to_json(v) for v in values]}
                        for bid, values in results],
        })

        records, report = self._validate(unit, schema, results, failures)
        self._emit("unit_validated", unit.doc_id, {
            "records": [codec.record_to_json(r) for r in records],
            "report": codec.report_to_json(report),
            "route": report.routing.route.value,
        })
        if report.routing.route == Route.HUMAN_REVIEW:
            self._emit("review_opened", unit.doc_id, {
                "category": list(unit.category),
                "reasons": list(report.routing.reasons)})
        self._emit("unit_finalized", unit.doc_id, {})

    def _run_backends(self, doc_id: str, prompt, schema):
        results: list[tuple[str, list[FieldValue]]] = []
        failures: list[str] = []
        for backend in self.backends:
            try:
                results.append((backend.backend_id, extract(prompt, backend, schema, doc_id)))
            except ExtractionFailure as exc:
                failures.append(str(exc))
        return results, failures

    def _validate(self, unit: UnitState, schema, results, failures):
        extra_reasons: list[str] = [f"extraction failure: {f}" for f in failures]
        if unit.ambiguous_split:
            extra_reasons.append("ambiguous split: long bundle with no boundary signal")
        if unit.label.doc_type == DocType.OTHER and "classificator" not in self.ablate:
            extra_reasons.append("unclassified document")
        if not results:
            records: list[ConsensusRecord] = []
            routing = RoutingDecision(Route.HUMAN_REVIEW,
                                      tuple(extra_reasons or ["no backend produced output"]))
            report = ValidationReport(unit.doc_id, (), (), routing)
            return records, report
        records = consensus(results)
        report = validate_document(unit.doc_id, records, schema, self.config, unit.category)
        if extra_reasons and report.routing.route == Route.AUTO_ACCEPT:
            report = replace(report, routing=RoutingDecision(
                Route.HUMAN_REVIEW, tuple(extra_reasons)))
        elif extra_reasons:
            report = replace(report, routing=RoutingDecision(
                report.routing.route, report.routing.reasons + tuple(extra_reasons)))
        return records, report

    # --- review operations --------------------------------------------------

    def _require_open_task(self, doc_id: str) -> ReviewTask:
        if doc_id not in self.units or doc_id not in self.tasks:
            raise UnknownDocumentError(doc_id)
        task = self.tasks[doc_id]
        if task.status == "resolved":
            raise TaskStateError(f"{doc_id}: task already resolved")
        return task

    def apply_correction(self, doc_id: str, field_name: str, value: str,
                         reviewer_id: str = "reviewer") -> dict[str, Any]:
        task = self._require_open_task(doc_id)
        unit = self.units[doc_id]
        schema = self.schema_for(unit)
        spec = next((f for f in schema if f.name == field_name), None)
        if spec is None:
            raise UnknownFieldError(field_name)
        current = next((r.chosen for r in unit.records if r.field == field_name), None)
        original = MISSING if current is None or current.is_missing else current.raw
        fb = CorrectionFeedback(
            feedback_id=f"fb{next(self._feedback_seq)}",
            doc_id=doc_id, field=field_name,
            original_value=original, corrected_value=value,
            doc_type=unit.label.doc_type, supplier_id=unit.category[0],
            reviewer_id=reviewer_id, ts=self.log.clock())
        if is_noop_correction(fb, spec.kind):
            raise NoopCorrectionError(f"{field_name}: correction equals current value")
        pattern = classify_error(fb, schema)
        self._emit("correction", doc_id, {
            "feedback": {
                "feedback_id": fb.feedback_id, "doc_id": fb.doc_id, "field": fb.field,
                "original_value": fb.original_value, "corrected_value": fb.corrected_value,
                "doc_type": fb.doc_type.value, "supplier_id": fb.supplier_id,
                "reviewer_id": fb.reviewer_id, "ts": fb.ts},
            "pattern": pattern.error_class.value})

        head = self.prompts.head(unit.category)
        markdown = unit.parsed.markdown if unit.parsed else ""
        updated = apply_feedback(fb, pattern, head, self.parser_config, markdown, schema)
        new_version: Optional[PromptVersion] = None
        if isinstance(updated, PromptVersion):
            new_version = updated
            self._emit("prompt_version", doc_id, {"version": version_to_json(updated)})
        else:
            hint = updated.layout_hints[-1]
            self._emit("parser_config", doc_id, {
                "version": updated.version,
                "hint": {"category": list(hint.category), "note": hint.note}})

        self._apply_own_correction(unit, schema, spec, fb)
        inherited = 0
        if new_version is not None:
            inherited = self._run_inheritance(fb, new_version)
        return {"task": self.task_summary(doc_id), "inherited": inherited,
                "feedback_id": fb.feedback_id}

    def _apply_own_correction(self, unit: UnitState, schema, spec, fb: CorrectionFeedback) -> None:
        from .extract import Agreement
        normalized = normalize_value(spec.kind, fb.corrected_value)
        corrected = FieldValue(spec.name, fb.corrected_value,
                               normalized if normalized is not None else MISSING,
                               1.0, "human", unit.prompt_version, spec.kind)
        record = ConsensusRecord(spec.name, corrected, Agreement.SINGLE, False)
        records = [record if r.field == spec.name else r for r in unit.records]
        if all(r.field != spec.name for r in unit.records):
            records.append(record)
        report = validate_document(unit.doc_id, records, schema, self.config, unit.category)
        self._emit("field_corrected", unit.doc_id, {
            "field": spec.name, "value": fb.corrected_value,
            "records": [codec.record_to_json(r) for r in records],
            "report": codec.report_to_json(report)})

    def _review_fields(self, unit: UnitState) -> frozenset[str]:
        """Fields responsible for a document sitting in review: failing checks,
        consensus splits, missing or sub-threshold required values."""
        if unit.report is None:
            return frozenset()
        fields: set[str] = set()
        for o in unit.report.outcomes:
            if o.status.value == "fail":
                fields.update(o.affected_fields)
        for r in unit.records:
            if r.flagged:
                fields.add(r.field)
        for v in unit.report.adjusted:
            threshold = self.config.effective_threshold(v.field, unit.category)
            if v.is_missing or v.confidence < threshold:
                fields.add(v.field)
        return frozenset(fields)

    def _run_inheritance(self, fb: CorrectionFeedback, new_version: PromptVersion) -> int:
        pending = [
            PendingDocView(u.doc_id, u.category, u.state.stage, self._review_fields(u))
            for u in self.units.values()
            if u.state.stage not in (Stage.ACCEPTED, Stage.FALLBACK)
            and not (u.doc_id in self.tasks and self.tasks[u.doc_id].status == "resolved")
        ]
        tasks = inherit(fb, new_version, pending)
        for task in tasks:
            target = self.units[task.doc_id]
            self._emit("inheritance", task.doc_id, {
                "feedback_id": fb.feedback_id, "from_doc": fb.doc_id,
                "round": task.round, "version": new_version.version_id})
            self._reextract(target, new_version)
        return len(tasks)

    def _reextract(self, unit: UnitState, version: PromptVersion) -> None:
        schema = self.schema_for(unit)
        prompt = assemble_prompt(schema, unit.parsed, version)
        results, failures = self._run_backends(unit.doc_id, prompt, schema)
        if not results:
            return
        records = consensus(results)
        report = validate_document(unit.doc_id, records, schema, self.config, unit.category)
        self._emit("reextracted", unit.doc_id, {
            "prompt_version": version.version_id,
            "results": [{"backend_id": bid,
                         "values": [codec.field_value_to_json(v) for v in values]}
                        for bid, values in results],
            "records": [codec.record_to_json(r) for r in records],
            "report": codec.report_to_json(report),
            "route": report.routing.route.value})

    def confirm(self, doc_id: str, review_seconds: Optional[float] = None) -> dict[str, Any]:
        self._require_open_task(doc_id)
        self._emit("confirmed", doc_id, {"review_seconds": review_seconds})
        return self.task_summary(doc_id)

    # --- views --------------------------------------------------------------

    def queue(self, status: Optional[str] = None) -> list[dict[str, Any]]:
        if status is not None and status not in ("pending", "in_progress", "resolved"):
            raise ValueError(f"invalid status {status!r}")
        tasks = sorted(self.tasks.values(), key=lambda t: t.opened_at)
        if status is not None:
            tasks = [t for t in tasks if t.status == status]
        return [self.task_summary(t.doc_id) for t in tasks]

    def task_summary(self, doc_id: str) -> dict[str, Any]:
        task = self.tasks[doc_id]
        return {
            "doc_id": task.doc_id,
            "category": list(task.category),
            "status": task.status,
            "opened_at": task.opened_at,
            "reasons": list(task.reasons),
            "resolved_at": task.resolved_at,
            "review_seconds": task.review_seconds,
            "resolution": task.resolution,
        }

    def document_view(self, doc_id: str) -> dict[str, Any]:
        if doc_id not in self.units:
            raise UnknownDocumentError(doc_id)
        unit = self.units[doc_id]
        schema = self.schema_for(unit)
        thresholds = {f.name: self.config.effective_threshold(f.name, unit.category)
                      for f in schema}
        return {
            "doc_id": doc_id,
            "category": list(unit.category),
            "stage": unit.state.stage.value,
            "markdown": unit.parsed.markdown if unit.parsed else "",
            "prompt_version": unit.prompt_version,
            "fields": [codec.record_to_json(r) for r in unit.records],
            "report": codec.report_to_json(unit.report) if unit.report else None,
            "thresholds": thresholds,
            "schema": codec.schema_to_json(schema),
            "task": self.task_summary(doc_id) if doc_id in self.tasks else None,
        }

    def stats(self) -> PipelineStats:
        terminal = [u for u in self.units.values() if u.state.stage in
                    (Stage.ACCEPTED, Stage.IN_REVIEW, Stage.FALLBACK)]
        total = len(terminal)
        fallback = sum(1 for u in terminal if u.state.stage == Stage.FALLBACK)
        ai_completed = total - fallback
        reviewed = len(self.tasks)
        durations = [t.review_seconds for t in self.tasks.values()
                     if t.review_seconds is not None]
        return PipelineStats(
            total_docs=total,
            ai_completed=ai_completed,
            fallback_docs=fallback,
            review_rate=(reviewed / total) if total else None,
            automation_rate=(ai_completed / total) if total else None,
            avg_review_seconds=(sum(durations) / len(durations)) if durations else None,
        )
