"""Shared domain types, configuration, and the per-document pipeline state machine."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional


class DocType(str, Enum):
    INVOICE = "invoice"
    DELIVERY_NOTE = "delivery_note"
    OTHER = "other"


class Route(str, Enum):
    AUTO_ACCEPT = "auto_accept"
    HUMAN_REVIEW = "human_review"
    NON_AI_FALLBACK = "non_ai_fallback"


MISSING = "__missing__"


@dataclass(frozen=True)
class TextBlock:
    text: str
    x0: float
    y0: float
    x1: float
    y1: float
    font_size_hint: float = 10.0

    def __post_init__(self):
        if not (0.0 <= self.x0 < self.x1 <= 1.0 and 0.0 <= self.y0 < self.y1 <= 1.0):
            raise ValueError(f"bad block box ({self.x0},{self.y0})-({self.x1},{self.y1})")
        if self.font_size_hint <= 0:
            raise ValueError("font_size_hint must be positive")

    @property
    def x_center(self) -> float:
        return (self.x0 + self.x1) / 2.0


@dataclass(frozen=True)
class TableGrid:
    rows: int
    cols: int
    cells: tuple[str, ...]
    y0: float = 0.5

    def __post_init__(self):
        if len(self.cells) != self.rows * self.cols:
            raise ValueError(f"table cells {len(self.cells)} != {self.rows}x{self.cols}")

    def row(self, i: int) -> tuple[str, ...]:
        return self.cells[i * self.cols:(i + 1) * self.cols]


@dataclass(frozen=True)
class Page:
    index: int
    blocks: tuple[TextBlock, ...] = ()
    tables: tuple[TableGrid, ...] = ()
    footer_text: Optional[str] = None


@dataclass(frozen=True)
class DocBundle:
    doc_id: str
    source_name: str
    pages: tuple[Page, ...]
    received_at: str = ""

    def __post_init__(self):
        if not self.pages:
            raise ValueError("bundle must have at least one page")
        for i, p in enumerate(self.pages):
            if p.index != i:
                raise ValueError(f"page index {p.index} at position {i} not contiguous")


@dataclass(frozen=True)
class CategoryLabel:
    supplier_id: str
    doc_type: DocType
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence outside [0,1]")
        if self.supplier_id == "unknown" and self.doc_type != DocType.OTHER:
            raise ValueError("unknown supplier only allowed with doc_type=other")

    @property
    def category(self) -> tuple[str, str]:
        return (self.supplier_id, self.doc_type.value)


UNKNOWN_LABEL = CategoryLabel("unknown", DocType.OTHER, 0.0)


class FieldKind(str, Enum):
    DATE = "date"
    MONEY = "money"
    PERCENTAGE = "percentage"
    CURRENCY_CODE = "currency_code"
    TAX_ID = "tax_id"
    TEXT = "text"
    QUANTITY = "quantity"
    LINE_ITEMS = "line_items"


@dataclass(frozen=True)
class FieldSchema:
    name: str
    kind: FieldKind
    required: bool = False
    admissible_values: Optional[frozenset[str]] = None


def check_schema(schema: list[FieldSchema]) -> list[FieldSchema]:
    names = [f.name for f in schema]
    if len(names) != len(set(names)):
        raise ValueError("duplicate field names in schema")
    if sum(1 for f in schema if f.kind == FieldKind.LINE_ITEMS) > 1:
        raise ValueError("at most one line_items field per schema")
    return schema


@dataclass(frozen=True)
class RoutingDecision:
    route: Route
    reasons: tuple[str, ...] = ()


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    confidence_threshold_default: float = 0.85
    category_thresholds: dict[str, float] = field(default_factory=dict)  # "supplier/doc_type" -> t
    field_thresholds: dict[str, float] = field(default_factory=dict)
    arithmetic_tolerance_minor_units: int = 2
    vat_table: dict[str, frozenset[float]] = field(
        default_factory=lambda: {"IT": frozenset({0.0, 4.0, 5.0, 10.0, 22.0})}
    )
    default_country: str = "IT"
    split_confidence: float = 0.7
    header_crop_fraction: float = 0.4
    disabled_checks: frozenset[str] = frozenset()

    def __post_init__(self):
        for name, v in [
            ("confidence_threshold_default", self.confidence_threshold_default),
            ("split_confidence", self.split_confidence),
            *[(f"category_thresholds[{k}]", v) for k, v in self.category_thresholds.items()],
            *[(f"field_thresholds[{k}]", v) for k, v in self.field_thresholds.items()],
        ]:
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name}={v} outside [0,1]")
        if not (0.80 <= self.confidence_threshold_default <= 0.90):
            raise ConfigError("default threshold must lie inside [0.80, 0.90]")
        if not (0.0 < self.header_crop_fraction <= 1.0):
            raise ConfigError("header_crop_fraction outside (0,1]")
        if self.arithmetic_tolerance_minor_units < 0:
            raise ConfigError("arithmetic tolerance must be >= 0")

    def effective_threshold(self, field_name: str, category: tuple[str, str]) -> float:
        if field_name in self.field_thresholds:
            return self.field_thresholds[field_name]
        key = f"{category[0]}/{category[1]}"
        if key in self.category_thresholds:
            return self.category_thresholds[key]
        return self.confidence_threshold_default


def load_config(path) -> PipelineConfig:
    """Read a JSON config file, filling documented defaults for absent keys."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be a JSON object")
    return config_from_dict(raw)


def config_from_dict(raw: dict[str, Any]) -> PipelineConfig:
    kwargs: dict[str, Any] = {}
    simple = [
        "confidence_threshold_default", "arithmetic_tolerance_minor_units",
        "split_confidence", "header_crop_fraction", "default_country",
    ]
    for key in simple:
        if key in raw:
            kwargs[key] = raw[key]
    if "category_thresholds" in raw:
        kwargs["category_thresholds"] = dict(raw["category_thresholds"])
    if "field_thresholds" in raw:
        kwargs["field_thresholds"] = dict(raw["field_thresholds"])
    if "vat_table" in raw:
        kwargs["vat_table"] = {c: frozenset(float(v) for v in vs) for c, vs in raw["vat_table"].items()}
    if "disabled_checks" in raw:
        kwargs["disabled_checks"] = frozenset(raw["disabled_checks"])
    unknown = set(raw) - set(simple) - {"category_thresholds", "field_thresholds", "vat_table", "disabled_checks"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# --- pipeline state machine -------------------------------------------------

class Stage(str, Enum):
    INGESTED = "ingested"
    CLASSIFIED = "classified"
    SPLIT = "split"
    PARSED = "parsed"
    EXTRACTED = "extracted"
    VALIDATED = "validated"
    ACCEPTED = "accepted"
    IN_REVIEW = "in_review"
    FALLBACK = "fallback"


PROGRESS_ORDER = [Stage.INGESTED, Stage.CLASSIFIED, Stage.SPLIT,
                  Stage.PARSED, Stage.EXTRACTED, Stage.VALIDATED]
TERMINAL_STAGES = {Stage.ACCEPTED, Stage.IN_REVIEW, Stage.FALLBACK}

_ROUTE_TO_STAGE = {
    Route.AUTO_ACCEPT: Stage.ACCEPTED,
    Route.HUMAN_REVIEW: Stage.IN_REVIEW,
    Route.NON_AI_FALLBACK: Stage.FALLBACK,
}


class StateMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class StageOutput:
    stage: Stage
    payload: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineState:
    doc_id: str
    stage: Stage = Stage.INGESTED
    artifacts: dict[str, Any] = field(default_factory=dict)
    route: Optional[Route] = None


def advance_state(state: PipelineState, output: Optional[StageOutput]) -> PipelineState:
    """Move a document one step through the fixed stage order.

    Passing output=None on a validated document resolves it to its terminal
    stage according to the stored routing decision.
    """
    if state.stage in TERMINAL_STAGES:
        raise StateMismatchError(f"{state.doc_id}: already terminal ({state.stage.value})")
    if output is None:
        if state.stage != Stage.VALIDATED or state.route is None:
            raise StateMismatchError(f"{state.doc_id}: cannot finalize from {state.stage.value}")
        return replace(state, stage=_ROUTE_TO_STAGE[state.route])
    pos = PROGRESS_ORDER.index(state.stage)
    expected = PROGRESS_ORDER[pos + 1] if pos + 1 < len(PROGRESS_ORDER) else None
    if output.stage != expected:
        raise StateMismatchError(
            f"{state.doc_id}: got {output.stage.value} output while awaiting "
            f"{expected.value if expected else 'finalization'}"
        )
    if output.stage == Stage.EXTRACTED and "markdown" not in state.artifacts:
        raise StateMismatchError(f"{state.doc_id}: extraction without a parsed markdown artifact")
    artifacts = dict(state.artifacts)
    artifacts.update(output.payload)
    route = state.route
    if output.stage == Stage.VALIDATED:
        route = Route(output.payload["route"])
    return replace(state, stage=output.stage, artifacts=artifacts, route=route)
