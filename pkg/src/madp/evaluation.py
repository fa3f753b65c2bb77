"""Corpus-level evaluation: document accuracy, field precision/recall/F1,
intervention rate, per-category accuracy sums, and parser token statistics."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import codec
from .backends import Backend, ScriptedBackend
from .classify import train_signatures
from .model import MISSING, CategoryLabel, DocType, FieldKind, FieldSchema, PipelineConfig, config_from_dict
from .normalize import equality_key
from .runtime import DEFAULT_SCHEMAS, Runtime


@dataclass(frozen=True)
class GroundTruth:
    doc_id: str
    category: tuple[str, str]
    fields: dict[str, Optional[str]]  # canonical values; None = explicitly absent


@dataclass(frozen=True)
class FieldCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "FieldCounts") -> "FieldCounts":
        return FieldCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def prf(c: FieldCounts) -> tuple[float, float, float]:
    p = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    r = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2 * p * r / (p + r) if (p + r) else 0.0
    return p, r, f1


@dataclass
class EvalReport:
    doc_accuracy: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    per_field: dict[str, tuple[float, float, float]]
    intervention_rate: float
    categories_ok: float
    category_count: int
    mean_seconds_per_doc: float
    token_reduction_pct: float
    total_docs: int

    def to_json(self) -> dict:
        return {
            "doc_accuracy": self.doc_accuracy,
            "micro": {"precision": self.micro_precision, "recall": self.micro_recall,
                      "f1": self.micro_f1},
            "per_field": {k: {"precision": p, "recall": r, "f1": f}
                          for k, (p, r, f) in sorted(self.per_field.items())},
            "intervention_rate": self.intervention_rate,
            "categories_ok": self.categories_ok,
            "category_count": self.category_count,
            "mean_seconds_per_doc": self.mean_seconds_per_doc,
            "token_reduction_pct": self.token_reduction_pct,
            "total_docs": self.total_docs,
        }

    def to_markdown(self) -> str:
        lines = [
            "| Metric | Value |",
            "| --- | --- |",
            f"| Document accuracy | {self.doc_accuracy:.1%} |",
            f"| Categories OK | {self.categories_ok:.1f}/{self.category_count} |",
            f"| Micro F1 | {self.micro_f1:.3f} |",
            f"| Intervention rate | {self.intervention_rate:.1%} |",
            f"| Token reduction | {self.token_reduction_pct:.1f}% |",
            f"| Mean time/doc | {self.mean_seconds_per_doc:.3f}s |",
            "",
            "| Field | Precision | Recall | F1 |",
            "| --- | --- | --- | --- |",
        ]
        for name, (p, r, f1) in sorted(self.per_field.items()):
            lines.append(f"| {name} | {p:.3f} | {r:.3f} | {f1:.3f} |")
        return "\n".join(lines)


def score_document(extracted: dict[str, str], truth: GroundTruth,
                   schema: list[FieldSchema]) -> tuple[dict[str, FieldCounts], bool]:
    """Slot-filling convention: a wrong value counts as both fp and fn."""
    by_name = {f.name: f for f in schema}
    unknown = set(truth.fields) - set(by_name)
    if unknown:
        raise ValueError(f"{truth.doc_id}: truth fields not in schema: {sorted(unknown)}")
    counts: dict[str, FieldCounts] = {}
    doc_correct = True
    for name, expected in truth.fields.items():
        spec = by_name[name]
        got = extracted.get(name)
        got_missing = got is None or got == MISSING
        if expected is None:
            if not got_missing:
                counts[name] = FieldCounts(fp=1)
                if spec.required:
                    doc_correct = False
            continue
        if got_missing:
            counts[name] = FieldCounts(fn=1)
            if spec.required:
                doc_correct = False
        elif equality_key(spec.kind, got) == equality_key(spec.kind, expected):
            counts[name] = FieldCounts(tp=1)
        else:
            counts[name] = FieldCounts(fp=1, fn=1)
            if spec.required:
                doc_correct = False
    return counts, doc_correct


def categories_ok(per_doc: list[tuple[tuple[str, str], bool]]) -> float:
    """Sum over categories of (correct docs in category / docs in category)."""
    if not per_doc:
        raise ValueError("empty corpus")
    totals: dict[tuple[str, str], list[int]] = {}
    for category, correct in per_doc:
        bucket = totals.setdefault(category, [0, 0])
        bucket[0] += int(correct)
        bucket[1] += 1
    return sum(ok / n for ok, n in totals.values())


# --- corpus harness ---------------------------------------------------------

@dataclass
class Corpus:
    root: Path
    bundles: list  # DocBundle
    truths: dict[str, GroundTruth]
    backends: list[Backend]
    config: PipelineConfig = field(default_factory=PipelineConfig)


def load_corpus(root: Path) -> Corpus:
    root = Path(root)
    bundles = []
    for path in sorted((root / "bundles").glob("*.json")):
        bundles.append(codec.bundle_from_json(json.loads(path.read_text(encoding="utf-8"))))
    truths = {}
    for path in sorted((root / "truth").glob("*.json")):
        d = json.loads(path.read_text(encoding="utf-8"))
        truths[d["doc_id"]] = GroundTruth(d["doc_id"], tuple(d["category"]), d["fields"])
    backends = []
    for path in sorted((root / "answers").glob("*.json")):
        answers = json.loads(path.read_text(encoding="utf-8"))
        backends.append(ScriptedBackend(path.stem, answers))
    config = PipelineConfig()
    config_path = root / "config.json"
    if config_path.exists():
        config = config_from_dict(json.loads(config_path.read_text(encoding="utf-8")))
    return Corpus(root, bundles, truths, backends, config)


def build_runtime(corpus: Corpus, workdir: Optional[Path] = None,
                  ablate: frozenset[str] = frozenset()) -> Runtime:
    labeled = [
        (b, CategoryLabel(corpus.truths[b.doc_id].category[0],
                          DocType(corpus.truths[b.doc_id].category[1]), 1.0))
        for b in corpus.bundles if b.doc_id in corpus.truths
    ]
    signatures = train_signatures(labeled, corpus.config)
    return Runtime(workdir=workdir, config=corpus.config, backends=corpus.backends,
                   signatures=signatures, ablate=ablate)


def corpus_report(corpus: Corpus, runtime: Optional[Runtime] = None,
                  ablate: frozenset[str] = frozenset()) -> EvalReport:
    if runtime is None:
        runtime = build_runtime(corpus, ablate=ablate)
    started = time.monotonic()
    for bundle in corpus.bundles:
        runtime.ingest(bundle)
    runtime.run_all()
    elapsed = time.monotonic() - started

    micro = FieldCounts()
    per_field: dict[str, FieldCounts] = {}
    per_doc: list[tuple[tuple[str, str], bool]] = []
    correct_docs = 0
    reductions = []
    scored = 0
    for doc_id, truth in corpus.truths.items():
        unit = runtime.units.get(doc_id)
        if unit is None:
            per_doc.append((truth.category, False))
            continue
        schema = DEFAULT_SCHEMAS.get(truth.category[1], DEFAULT_SCHEMAS["invoice"])
        extracted = {r.field: r.chosen.normalized for r in unit.records}
        counts, doc_correct = score_document(extracted, truth, schema)
        for name, c in counts.items():
            micro = micro + c
            per_field[name] = per_field.get(name, FieldCounts()) + c
        per_doc.append((truth.category, doc_correct))
        correct_docs += int(doc_correct)
        scored += 1
        if unit.parsed is not None and unit.parsed.raw_token_count > 0:
            reductions.append(
                (unit.parsed.raw_token_count - unit.parsed.parsed_token_count)
                / unit.parsed.raw_token_count)
    stats = runtime.stats()
    p, r, f1 = prf(micro)
    total = len(corpus.truths)
    return EvalReport(
        doc_accuracy=correct_docs / total if total else 0.0,
        micro_precision=p, micro_recall=r, micro_f1=f1,
        per_field={k: prf(v) for k, v in per_field.items()},
        intervention_rate=(stats.review_rate or 0.0),
        categories_ok=categories_ok(per_doc),
        category_count=len({c for c, _ in per_doc}),
        mean_seconds_per_doc=elapsed / total if total else 0.0,
        token_reduction_pct=100.0 * sum(reductions) / len(reductions) if reductions else 0.0,
        total_docs=total,
    )
