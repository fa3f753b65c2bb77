"""Synthetic fixture corpus: 20 supplier/doc-type categories x 5 documents,
with two-column layouts, multi-page documents, concatenated batch files, and
scripted backend answers engineered for known pipeline behavior.

Targets built into the corpus:
  - scripted consensus disagreement on exactly 15 of 100 documents
  - footer boilerplate sized so parsing drops ~35% of raw tokens per document
  - two-column documents whose scripted answers degrade unless the prompt
    contains text in correct reading order (parser-sensitive fixtures)
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from . import codec
from .model import DocBundle, Page, TableGrid, TextBlock
from .normalize import normalize_line_items
from .parse import ParserConfig, naive_concatenation, render_markdown

INVOICE_SUPPLIERS = [
    "ACME", "GLOBEX", "INITECH", "UMBRELLA", "STARK", "WAYNE", "TYRELL",
    "CYBERDYNE", "WONKA", "OSCORP", "HOOLI", "DUFF", "VANDELAY", "SIRIUS",
    "MONARCH", "APERTURE",
]
DELIVERY_SUPPLIERS = ["BLUTH", "DUNDER", "PRESTIGE", "SOYLENT"]

CATEGORIES: list[tuple[str, str]] = (
    [(s, "invoice") for s in INVOICE_SUPPLIERS]
    + [(s, "delivery_note") for s in DELIVERY_SUPPLIERS]
)

DOCS_PER_CATEGORY = 5
TWO_COLUMN_CATEGORIES = set(range(6))  # ablation-sensitive suppliers
FLAGGED_DOC_INDEX = 3                   # doc #3 of categories 0..14 -> 15 flagged docs
FLAGGED_CATEGORIES = set(range(15))
MULTIPAGE_DOC_INDEX = 5                 # doc #5 of invoice categories spans 2 pages

TOKEN_REDUCTION_TARGET = 0.35

_BOILERPLATE = (
    "Grazie per la fiducia accordataci le condizioni generali di vendita sono "
    "disponibili su richiesta il pagamento oltre i termini indicati comporta "
    "interessi di mora ai sensi di legge merce resa franco nostro magazzino "
    "salvo diverso accordo scritto eventuali reclami devono pervenire entro "
    "otto giorni dal ricevimento della merce"
).split()


def _cents(v: int) -> str:
    return f"{v // 100}.{v % 100:02d}"


def _tax_id(ci: int) -> str:
    return f"{10000000000 + ci * 791237 + 111:011d}"[:11]


def _doc_id(supplier: str, idx: int) -> str:
    return f"{supplier.lower()}-{idx:02d}"


def _pad_footers(pages: list[Page], pagination: list[str]) -> list[Page]:
    """Size the footer boilerplate so footers carry ~35% of raw tokens."""
    body_tokens = len(naive_concatenation(pages).split())
    target = round(body_tokens * TOKEN_REDUCTION_TARGET / (1 - TOKEN_REDUCTION_TARGET))
    pag_tokens = sum(len(p.split()) for p in pagination)
    pad = max(0, target - pag_tokens)
    words = [(_BOILERPLATE[i % len(_BOILERPLATE)]) for i in range(pad)]
    out = []
    for i, page in enumerate(pages):
        footer = pagination[i]
        if i == len(pages) - 1 and words:
            footer = footer + " " + " ".join(words)
        out.append(Page(page.index, page.blocks, page.tables, footer))
    return out


def _header_blocks(supplier: str, doc_type: str, number: str, ci: int) -> list[TextBlock]:
    title = "FATTURA" if doc_type == "invoice" else "DOCUMENTO DI TRASPORTO"
    return [
        TextBlock(f"{supplier} S.p.A.", 0.05, 0.05, 0.55, 0.10, 20.0),
        TextBlock(f"{title} N. {number}", 0.05, 0.12, 0.50, 0.16, 14.0),
        TextBlock(f"Via Roma {ci + 1}, 10121 Torino", 0.05, 0.18, 0.45, 0.21, 10.0),
    ]


def _body_block(text: str, y: float, x0: float = 0.05, x1: float = 0.55) -> TextBlock:
    return TextBlock(text, x0, y, x1, y + 0.03, 10.0)


def build_invoice_doc(ci: int, idx: int) -> dict:
    supplier, doc_type = CATEGORIES[ci]
    doc_id = _doc_id(supplier, idx)
    rng = random.Random(1000 * ci + idx)
    q1, q2 = rng.randint(1, 9), rng.randint(1, 9)
    p1, p2 = rng.randint(15, 900) * 100, rng.randint(15, 900) * 100
    sub = q1 * p1 + q2 * p2
    vat = 22 if idx % 2 else 10
    tax = round(sub * vat / 100)
    total = sub + tax
    number = f"INV-{supplier}-{idx:03d}"
    inv_day, due_day = 2 + idx, 2 + idx
    inv_date_it, inv_date_iso = f"{inv_day:02d}/01/2026", f"2026-01-{inv_day:02d}"
    due_date_it, due_date_iso = f"{due_day:02d}/02/2026", f"2026-02-{due_day:02d}"
    tax_id = _tax_id(ci)
    notes = "Pagamento a 30 giorni data fattura"
    items = [
        {"description": f"Articolo {supplier.title()} alfa", "quantity": str(q1),
         "unit_price": _cents(p1), "line_total": _cents(q1 * p1)},
        {"description": f"Articolo {supplier.title()} beta", "quantity": str(q2),
         "unit_price": _cents(p2), "line_total": _cents(q2 * p2)},
    ]
    table = TableGrid(3, 4, (
        "Descrizione", "Quantita", "Prezzo", "Totale",
        items[0]["description"], items[0]["quantity"], items[0]["unit_price"], items[0]["line_total"],
        items[1]["description"], items[1]["quantity"], items[1]["unit_price"], items[1]["line_total"],
    ), y0=0.72)

    body_texts = [
        f"Data fattura: {inv_date_it}",
        f"Scadenza: {due_date_it}",
        f"P.IVA: {tax_id}",
        "Valuta: EUR",
        f"IVA: {vat}%",
        f"Note: {notes}",
    ]
    totals_texts = [
        f"Imponibile: {_cents(sub)} EUR",
        f"IVA: {_cents(tax)} EUR",
        f"Totale: {_cents(total)} EUR",
    ]

    two_column = ci in TWO_COLUMN_CATEGORIES and idx != MULTIPAGE_DOC_INDEX
    multipage = doc_type == "invoice" and idx == MULTIPAGE_DOC_INDEX
    header = _header_blocks(supplier, doc_type, number, ci)

    if multipage:
        page0 = Page(0, tuple(header + [
            _body_block(t, 0.45 + 0.05 * i) for i, t in enumerate(body_texts)]), ())
        page1 = Page(1, tuple(
            [_body_block(t, 0.45 + 0.05 * i) for i, t in enumerate(totals_texts)]),
            (TableGrid(table.rows, table.cols, table.cells, 0.72),))
        pages = _pad_footers([page0, page1], ["Page 1 of 2", "Page 2 of 2"])
    elif two_column:
        left = [_body_block(t, 0.45 + 0.05 * i, 0.05, 0.40)
                for i, t in enumerate(body_texts[:4] + totals_texts)]
        right = [_body_block(t, 0.45 + 0.07 * i, 0.60, 0.95)
                 for i, t in enumerate(body_texts[4:])]
        blocks = header[:]
        for i in range(max(len(left), len(right))):  # interleave input order
            if i < len(left):
                blocks.append(left[i])
            if i < len(right):
                blocks.append(right[i])
        page0 = Page(0, tuple(blocks), (TableGrid(table.rows, table.cols, table.cells, 0.98),))
        pages = _pad_footers([page0], ["Page 1 of 1"])
    else:
        blocks = header + [_body_block(t, 0.40 + 0.035 * i)
                           for i, t in enumerate(body_texts + totals_texts)]
        page0 = Page(0, tuple(blocks), (table,))
        pages = _pad_footers([page0], ["Page 1 of 1"])

    bundle = DocBundle(doc_id, f"{doc_id}.pdf", tuple(pages), "2026-02-01T00:00:00Z")

    fields = {
        "invoice_number": {"value": number, "confidence": 0.95},
        "invoice_date": {"value": inv_date_it, "confidence": 0.93},
        "due_date": {"value": due_date_it, "confidence": 0.93},
        "subtotal": {"value": f"{_cents(sub)} EUR", "confidence": 0.91},
        "tax_amount": {"value": f"{_cents(tax)} EUR", "confidence": 0.91},
        "total_amount": {"value": f"{_cents(total)} EUR", "confidence": 0.92},
        "vat_rate": {"value": f"{vat}%", "confidence": 0.90},
        "currency": {"value": "EUR", "confidence": 0.96},
        "supplier_tax_id": {"value": tax_id, "confidence": 0.94},
        "notes": {"value": notes, "confidence": 0.90},
        "line_items": {"value": items, "confidence": 0.88},
    }
    truth = {
        "invoice_number": number,
        "invoice_date": inv_date_iso,
        "due_date": due_date_iso,
        "subtotal": f"{sub} EUR",
        "tax_amount": f"{tax} EUR",
        "total_amount": f"{total} EUR",
        "vat_rate": str(vat),
        "currency": "EUR",
        "supplier_tax_id": tax_id,
        "notes": notes,
        "line_items": normalize_line_items(items),
    }
    return {"bundle": bundle, "fields": fields, "truth": truth,
            "category": [supplier, doc_type], "doc_id": doc_id,
            "two_column": two_column}


def build_delivery_doc(ci: int, idx: int) -> dict:
    supplier, doc_type = CATEGORIES[ci]
    doc_id = _doc_id(supplier, idx)
    number = f"DDT-{supplier}-{idx:03d}"
    date_it, date_iso = f"{10 + idx:02d}/01/2026", f"2026-01-{10 + idx:02d}"
    tax_id = _tax_id(ci)
    notes = "Consegna presso magazzino centrale"
    rng = random.Random(9000 + 100 * ci + idx)
    items = [
        {"description": f"Collo {supplier.title()} {k}", "quantity": str(rng.randint(1, 20))}
        for k in range(1, 4)
    ]
    table = TableGrid(4, 2, (
        "Descrizione", "Quantita",
        items[0]["description"], items[0]["quantity"],
        items[1]["description"], items[1]["quantity"],
        items[2]["description"], items[2]["quantity"],
    ), y0=0.70)
    body_texts = [
        f"Data consegna: {date_it}",
        f"P.IVA: {tax_id}",
        f"Note: {notes}",
    ]
    blocks = _header_blocks(supplier, doc_type, number, ci) + [
        _body_block(t, 0.45 + 0.05 * i) for i, t in enumerate(body_texts)]
    pages = _pad_footers([Page(0, tuple(blocks), (table,))], ["Page 1 of 1"])
    bundle = DocBundle(doc_id, f"{doc_id}.pdf", tuple(pages), "2026-02-01T00:00:00Z")
    fields = {
        "document_number": {"value": number, "confidence": 0.95},
        "delivery_date": {"value": date_it, "confidence": 0.93},
        "supplier_tax_id": {"value": tax_id, "confidence": 0.94},
        "notes": {"value": notes, "confidence": 0.90},
        "line_items": {"value": items, "confidence": 0.88},
    }
    truth = {
        "document_number": number,
        "delivery_date": date_iso,
        "supplier_tax_id": tax_id,
        "notes": notes,
        "line_items": normalize_line_items(items),
    }
    return {"bundle": bundle, "fields": fields, "truth": truth,
            "category": [supplier, doc_type], "doc_id": doc_id,
            "two_column": False}


def _reading_order_marker(bundle: DocBundle) -> str:
    """Two adjacent markdown lines that are NOT adjacent in the naive text."""
    parsed = render_markdown(bundle.doc_id, list(bundle.pages), ParserConfig())
    md_lines = [l for l in parsed.markdown.splitlines() if l and not l.startswith("|")]
    naive = naive_concatenation(list(bundle.pages))
    for a, b in zip(md_lines, md_lines[1:]):
        candidate = f"{a}\n{b}"
        if candidate not in naive:
            return candidate
    raise AssertionError(f"{bundle.doc_id}: no order-sensitive marker found")


def _degrade(fields: dict) -> dict:
    degraded = json.loads(json.dumps(fields))
    wrong = degraded["total_amount"]["value"]
    amount = wrong.split()[0]
    euros = int(amount.split(".")[0]) + 11
    degraded["total_amount"]["value"] = f"{euros}.99 EUR"
    degraded["total_amount"]["confidence"] = 0.86
    return degraded


def build_all_docs() -> list[dict]:
    docs = []
    for ci, (supplier, doc_type) in enumerate(CATEGORIES):
        for idx in range(1, DOCS_PER_CATEGORY + 1):
            if doc_type == "invoice":
                docs.append(build_invoice_doc(ci, idx))
            else:
                docs.append(build_delivery_doc(ci, idx))
    return docs


def _is_flagged(ci: int, idx: int) -> bool:
    return ci in FLAGGED_CATEGORIES and idx == FLAGGED_DOC_INDEX


def build_batches(docs_by_id: dict[str, dict]) -> list[dict]:
    """Concatenations of whole fixture documents, with the expected partition."""
    batches = []
    ids = sorted(docs_by_id)
    for j in range(8):
        members = [ids[(3 * j) % len(ids)], ids[(3 * j + 7) % len(ids)]]
        if j % 2 == 0:
            members.append(ids[(3 * j + 13) % len(ids)])
        pages = []
        parts = []
        for member in dict.fromkeys(members):  # drop accidental duplicates
            bundle = docs_by_id[member]["bundle"]
            start = len(pages)
            for p in bundle.pages:
                pages.append(Page(len(pages), p.blocks, p.tables, p.footer_text))
            parts.append({"doc_id": member, "start": start, "end": len(pages) - 1})
        batch_id = f"batch-{j:02d}"
        batches.append({
            "bundle": DocBundle(batch_id, f"{batch_id}.pdf", tuple(pages)),
            "parts": parts,
        })
    return batches


def build_corpus(root: Path) -> dict:
    """Write the full corpus tree; returns summary counts."""
    root = Path(root)
    for sub in ("bundles", "truth", "answers", "batches"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    docs = build_all_docs()
    b1: dict[str, dict] = {}
    b2: dict[str, dict] = {}
    flagged = 0
    for doc in docs:
        ci = next(i for i, c in enumerate(CATEGORIES) if list(c) == doc["category"])
        idx = int(doc["doc_id"].rsplit("-", 1)[1])
        bundle = doc["bundle"]
        (root / "bundles" / f"{doc['doc_id']}.json").write_text(
            json.dumps(codec.bundle_to_json(bundle), indent=1), encoding="utf-8")
        (root / "truth" / f"{doc['doc_id']}.json").write_text(
            json.dumps({"doc_id": doc["doc_id"], "category": doc["category"],
                        "fields": doc["truth"]}, indent=1), encoding="utf-8")
        entry1 = {"fields": doc["fields"]}
        fields2 = json.loads(json.dumps(doc["fields"]))
        for spec in fields2.values():  # second backend: same values, other formats/confidence
            spec["confidence"] = max(0.5, round(spec["confidence"] - 0.05, 2))
        entry2 = {"fields": fields2}
        if _is_flagged(ci, idx):
            fields2["notes"] = {"value": "Consegna urgente richiesta", "confidence": 0.55}
            flagged += 1
        if doc["two_column"]:
            marker = _reading_order_marker(bundle)
            entry1 = {"requires": marker, "fields": doc["fields"],
                      "degraded_fields": _degrade(doc["fields"])}
            entry2 = {"requires": marker, "fields": fields2,
                      "degraded_fields": _degrade(fields2)}
        b1[doc["doc_id"]] = {"*": entry1}
        b2[doc["doc_id"]] = {"*": entry2}
    (root / "answers" / "b1.json").write_text(json.dumps(b1, indent=1), encoding="utf-8")
    (root / "answers" / "b2.json").write_text(json.dumps(b2, indent=1), encoding="utf-8")

    docs_by_id = {d["doc_id"]: d for d in docs}
    batches = build_batches(docs_by_id)
    for batch in batches:
        bid = batch["bundle"].doc_id
        (root / "batches" / f"{bid}.json").write_text(
            json.dumps(codec.bundle_to_json(batch["bundle"]), indent=1), encoding="utf-8")
        (root / "batches" / f"{bid}.parts.json").write_text(
            json.dumps(batch["parts"], indent=1), encoding="utf-8")
    return {"documents": len(docs), "flagged": flagged, "batches": len(batches),
            "categories": len(CATEGORIES)}
