"""Canonical forms for extracted field values.

Canonical forms are plain strings so that consensus voting and validation can
compare values across backends regardless of surface formatting:

  date          -> "YYYY-MM-DD"
  money         -> "<minor_units> <code>" (code omitted when unknown), e.g. "12200 EUR"
  percentage    -> decimal string without the % sign, e.g. "22"
  currency_code -> upper-cased 3-letter code
  tax_id        -> upper-cased, spaces/dots stripped
  quantity      -> decimal string without trailing zeros
  text          -> whitespace-trimmed, case preserved
  line_items    -> canonical JSON array of per-row canonical cell lists

Unparseable typed values normalize to None; callers mark them missing.
"""

from __future__ import annotations

import json
import re
from datetime import date
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .model import FieldKind

_DATE_PATTERNS = [
    (re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$"), ("y", "m", "d")),
    (re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$"), ("d", "m", "y")),
    (re.compile(r"^(\d{1,2})-(\d{1,2})-(\d{4})$"), ("d", "m", "y")),
    (re.compile(r"^(\d{1,2})\.(\d{1,2})\.(\d{4})$"), ("d", "m", "y")),
]

_CURRENCY_SYMBOLS = {"€": "EUR", "$": "USD", "£": "GBP"}


def normalize_date(raw: str) -> Optional[str]:
    s = raw.strip()
    for pattern, order in _DATE_PATTERNS:
        m = pattern.match(s)
        if not m:
            continue
        parts = dict(zip(order, m.groups()))
        try:
            return date(int(parts["y"]), int(parts["m"]), int(parts["d"])).isoformat()
        except ValueError:
            return None
    return None


def _parse_amount(s: str) -> Optional[Decimal]:
    s = s.strip()
    if not s:
        return None
    # European grouping: 1.234,56 -> 1234.56
    if re.fullmatch(r"-?\d{1,3}(\.\d{3})+,\d+", s):
        s = s.replace(".", "").replace(",", ".")
    elif "," in s and "." not in s:
        s = s.replace(",", ".")
    else:
        s = s.replace(",", "")
    try:
        return Decimal(s)
    except InvalidOperation:
        return None


def normalize_money(raw: str) -> Optional[str]:
    s = raw.strip()
    code = ""
    for sym, c in _CURRENCY_SYMBOLS.items():
        if sym in s:
            code = c
            s = s.replace(sym, " ")
    m = re.search(r"\b([A-Za-z]{3})\b", s)
    if m and not m.group(1).isdigit():
        code = m.group(1).upper()
        s = s.replace(m.group(1), " ")
    amount = _parse_amount(s.strip())
    if amount is None:
        return None
    minor = int((amount * 100).to_integral_value())
    return f"{minor} {code}".strip()


def money_minor_units(normalized: str) -> int:
    return int(normalized.split()[0])


def normalize_percentage(raw: str) -> Optional[str]:
    s = raw.strip().rstrip("%").strip()
    amount = _parse_amount(s)
    if amount is None:
        return None
    return _canonical_decimal(amount)


def normalize_currency_code(raw: str) -> Optional[str]:
    s = raw.strip().upper()
    if not re.fullmatch(r"[A-Z]{3}", s):
        return None
    return s


def normalize_tax_id(raw: str) -> Optional[str]:
    s = re.sub(r"[\s.\-]", "", raw.strip()).upper()
    return s or None


def normalize_quantity(raw: str) -> Optional[str]:
    amount = _parse_amount(raw)
    if amount is None:
        return None
    return _canonical_decimal(amount)


def _canonical_decimal(d: Decimal) -> str:
    s = format(d.normalize(), "f")
    return "0" if s in ("-0", "0.0") else s


def normalize_text(raw: str) -> str:
    return raw.strip()


_LINE_ITEM_KINDS = {
    "description": FieldKind.TEXT,
    "quantity": FieldKind.QUANTITY,
    "unit_price": FieldKind.MONEY,
    "line_total": FieldKind.MONEY,
}


def normalize_line_items(raw: Any) -> Optional[str]:
    """Rows are dicts (or cell lists) normalized column-wise into canonical JSON."""
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError:
            return None
    if not isinstance(raw, list):
        return None
    rows = []
    for row in raw:
        if isinstance(row, dict):
            canon_row = {}
            for key in sorted(row):
                kind = _LINE_ITEM_KINDS.get(key, FieldKind.TEXT)
                cell = normalize_value(kind, str(row[key]))
                if cell is None:
                    return None
                canon_row[key] = cell
            rows.append(canon_row)
        elif isinstance(row, list):
            rows.append([normalize_text(str(c)) for c in row])
        else:
            return None
    return json.dumps(rows, sort_keys=True, separators=(",", ":"))


def normalize_value(kind: FieldKind, raw: Any) -> Optional[str]:
    if kind == FieldKind.LINE_ITEMS:
        return normalize_line_items(raw)
    s = str(raw)
    return {
        FieldKind.DATE: normalize_date,
        FieldKind.MONEY: normalize_money,
        FieldKind.PERCENTAGE: normalize_percentage,
        FieldKind.CURRENCY_CODE: normalize_currency_code,
        FieldKind.TAX_ID: normalize_tax_id,
        FieldKind.QUANTITY: normalize_quantity,
        FieldKind.TEXT: normalize_text,
    }[kind](s)


def equality_key(kind: FieldKind, normalized: str) -> str:
    """Comparison key for consensus: text compares case-folded, others exact."""
    if kind == FieldKind.TEXT:
        return normalized.casefold()
    return normalized
