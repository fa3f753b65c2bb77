"""Header-region document classification.

Reference classifier: hashed character-trigram bag over the header crop,
nearest centroid by cosine similarity (hash space 2^16). An external
image-based model can be plugged in through `classify_external`.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass
from typing import Callable, Optional

from .model import (CategoryLabel, DocBundle, DocType, Page, PipelineConfig,
                    TextBlock, UNKNOWN_LABEL)

HASH_SPACE = 1 << 16
UNKNOWN_SIMILARITY_CUTOFF = 0.3


@dataclass(frozen=True)
class CategorySignature:
    supplier_id: str
    doc_type: DocType
    centroid: dict[int, float]  # L2-normalized sparse vector
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")


def crop_header(page: Page, fraction: float) -> list[TextBlock]:
    """Blocks starting above the crop line, original order preserved."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must lie in (0,1]")
    return [b for b in page.blocks if b.y0 < fraction]


def _trigrams(text: str):
    s = text.lower()
    for i in range(len(s) - 2):
        yield s[i:i + 3]


def header_vector(blocks: list[TextBlock]) -> dict[int, float]:
    """L2-normalized hashed-trigram bag of the concatenated header text."""
    counts: dict[int, float] = {}
    text = " ".join(b.text for b in blocks)
    for tri in _trigrams(text):
        h = zlib.crc32(tri.encode("utf-8")) % HASH_SPACE
        counts[h] = counts.get(h, 0.0) + 1.0
    return _l2_normalize(counts)


def _l2_normalize(vec: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm == 0.0:
        return {}
    return {h: w / norm for h, w in vec.items()}


def _cosine(a: dict[int, float], b: dict[int, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b.get(h, 0.0) for h, w in a.items())


def classify(page: Page, signatures: list[CategorySignature],
             config: PipelineConfig) -> CategoryLabel:
    header = crop_header(page, config.header_crop_fraction)
    vec = header_vector(header)
    if not vec or not signatures:
        return UNKNOWN_LABEL
    best_sim, best_sig = -1.0, None
    for sig in signatures:
        sim = _cosine(vec, sig.centroid)
        if sim > best_sim:
            best_sim, best_sig = sim, sig
    confidence = min(1.0, max(0.0, best_sim))
    if best_sim < UNKNOWN_SIMILARITY_CUTOFF:
        return CategoryLabel("unknown", DocType.OTHER, confidence)
    return CategoryLabel(best_sig.supplier_id, best_sig.doc_type, confidence)


def train_signatures(labeled_bundles: list[tuple[DocBundle, CategoryLabel]],
                     config: Optional[PipelineConfig] = None) -> list[CategorySignature]:
    """One centroid per distinct (supplier_id, doc_type), mean of first-page header vectors."""
    if not labeled_bundles:
        raise ValueError("cannot train on an empty corpus")
    config = config or PipelineConfig()
    groups: dict[tuple[str, DocType], list[dict[int, float]]] = {}
    for bundle, label in labeled_bundles:
        header = crop_header(bundle.pages[0], config.header_crop_fraction)
        vec = header_vector(header)
        groups.setdefault((label.supplier_id, label.doc_type), []).append(vec)
    signatures = []
    for (supplier, doc_type), vecs in sorted(groups.items()):
        mean: dict[int, float] = {}
        for vec in vecs:
            for h, w in vec.items():
                mean[h] = mean.get(h, 0.0) + w / len(vecs)
        signatures.append(CategorySignature(supplier, doc_type, _l2_normalize(mean), len(vecs)))
    return signatures


# --- external model adapter -------------------------------------------------

class AdapterError(RuntimeError):
    pass


class FallbackRequired(RuntimeError):
    """Raised when the external classifier is exhausted; route non_ai_fallback."""


RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY_S = 0.2


def classify_external(header_text: str, post: Callable[[dict], dict],
                      image_ref: Optional[str] = None,
                      sleep: Callable[[float], None] = time.sleep) -> CategoryLabel:
    """Forward the header crop to a JSON-over-HTTP classification endpoint.

    `post` submits the request body and returns the decoded JSON response;
    it should raise on network failure. Retries with exponential backoff,
    then demands fallback routing.
    """
    body = {"header_text": header_text}
    if image_ref is not None:
        body["image_ref"] = image_ref
    last_exc: Optional[Exception] = None
    for attempt in range(RETRY_ATTEMPTS):
        try:
            response = post(body)
        except Exception as exc:  # network/timeout: retriable
            last_exc = exc
            if attempt < RETRY_ATTEMPTS - 1:
                sleep(RETRY_BASE_DELAY_S * (2 ** attempt))
            continue
        try:
            return CategoryLabel(
                supplier_id=response["supplier"],
                doc_type=DocType(response["doc_type"]),
                confidence=float(response["confidence"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise AdapterError(f"malformed classifier response: {response!r}") from exc
    raise FallbackRequired(f"classifier endpoint unreachable after {RETRY_ATTEMPTS} attempts: {last_exc}")


# --- signature store --------------------------------------------------------

def signatures_to_json(signatures: list[CategorySignature]) -> list[dict]:
    return [
        {
            "supplier_id": s.supplier_id,
            "doc_type": s.doc_type.value,
            "centroid": {str(h): w for h, w in sorted(s.centroid.items())},
            "sample_count": s.sample_count,
        }
        for s in signatures
    ]


def signatures_from_json(records: list[dict]) -> list[CategorySignature]:
    return [
        CategorySignature(
            supplier_id=r["supplier_id"],
            doc_type=DocType(r["doc_type"]),
            centroid={int(h): float(w) for h, w in r["centroid"].items()},
            sample_count=int(r["sample_count"]),
        )
        for r in records
    ]
