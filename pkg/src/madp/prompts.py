"""Versioned extraction prompts: assembly, lineage, and the on-disk store."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import DocType, FieldSchema
from .parse import ParsedDoc

MAX_EXAMPLES = 8


@dataclass(frozen=True)
class PromptExample:
    excerpt: str
    field: str
    value: str


@dataclass(frozen=True)
class PromptVersion:
    version_id: str  # "v1", "v2", ... strictly increasing per category
    category: tuple[str, str]  # (supplier_id, doc_type)
    parent_version: Optional[str]
    instruction_lines: tuple[str, ...] = ()
    examples: tuple[PromptExample, ...] = ()
    created_from: tuple[str, ...] = ()

    @property
    def number(self) -> int:
        return int(self.version_id.lstrip("v"))

    def child(self, instruction_lines: tuple[str, ...], examples: tuple[PromptExample, ...],
              created_from: tuple[str, ...]) -> "PromptVersion":
        if len(examples) > MAX_EXAMPLES:
            examples = examples[-MAX_EXAMPLES:]  # FIFO eviction, oldest first
        return PromptVersion(
            version_id=f"v{self.number + 1}",
            category=self.category,
            parent_version=self.version_id,
            instruction_lines=instruction_lines,
            examples=examples,
            created_from=created_from,
        )


def initial_version(category: tuple[str, str]) -> PromptVersion:
    return PromptVersion("v1", category, None)


@dataclass(frozen=True)
class PromptBundle:
    category: tuple[str, str]
    version_id: str
    rendered_text: str


_KIND_FORMATS = {
    "date": "ISO-8601 date (YYYY-MM-DD)",
    "money": "amount with currency, e.g. 122.00 EUR",
    "percentage": "number without the % sign",
    "currency_code": "3-letter ISO 4217 code",
    "tax_id": "tax identifier without spaces",
    "quantity": "plain number",
    "text": "free text",
    "line_items": "array of rows {description, quantity, unit_price, line_total}",
}


def assemble_prompt(schema: list[FieldSchema], parsed: ParsedDoc,
                    version: PromptVersion) -> PromptBundle:
    """Render the prompt deterministically: same inputs, byte-identical text."""
    if not schema:
        raise ValueError("cannot assemble a prompt for an empty schema")
    supplier, doc_type = version.category
    lines = [
        f"You are extracting structured data from a {doc_type} issued by {supplier}.",
        "",
        "Fields to extract:",
    ]
    for f in schema:
        req = "required" if f.required else "optional"
        spec = f"- {f.name} ({f.kind.value}, {req}): {_KIND_FORMATS[f.kind.value]}"
        if f.admissible_values:
            spec += f"; admissible values: {', '.join(sorted(f.admissible_values))}"
        lines.append(spec)
    lines += [
        "",
        "Output format: a single JSON object",
        '{"fields": {"<name>": {"value": <value>, "confidence": <0..1>}}}',
        "with one entry per field listed above.",
    ]
    examples = version.examples[-MAX_EXAMPLES:]
    if examples:
        lines += ["", "Examples of correct extractions:"]
        for ex in examples:
            lines += [f"  Document excerpt:", *(f"    {l}" for l in ex.excerpt.splitlines()),
                      f"  => {ex.field} = {ex.value}"]
    lines += [
        "",
        "If a field is missing from the document, output null with confidence 0.",
        "If a value is ambiguous, pick the best reading and lower its confidence.",
        "Never invent values that are not present in the document.",
    ]
    for extra in version.instruction_lines:
        lines.append(extra)
    lines += ["", "Document:", parsed.markdown]
    return PromptBundle(version.category, version.version_id, "\n".join(lines))


# --- store ------------------------------------------------------------------

class StaleVersionError(RuntimeError):
    """Commit raced: the supplied parent is no longer the lineage head."""


def _category_key(category: tuple[str, str]) -> str:
    return f"{category[0]}__{category[1]}"


def version_to_json(v: PromptVersion) -> dict:
    return {
        "version_id": v.version_id,
        "category": list(v.category),
        "parent_version": v.parent_version,
        "instruction_lines": list(v.instruction_lines),
        "examples": [{"excerpt": e.excerpt, "field": e.field, "value": e.value}
                     for e in v.examples],
        "created_from": list(v.created_from),
    }


def version_from_json(d: dict) -> PromptVersion:
    return PromptVersion(
        version_id=d["version_id"],
        category=(d["category"][0], d["category"][1]),
        parent_version=d["parent_version"],
        instruction_lines=tuple(d["instruction_lines"]),
        examples=tuple(PromptExample(e["excerpt"], e["field"], e["value"])
                       for e in d["examples"]),
        created_from=tuple(d["created_from"]),
    )


class PromptStore:
    """Per-category prompt lineages: immutable version records plus a head pointer.

    Optionally write-through to a directory (one JSON file per version, one
    HEAD file per category); in-memory state is authoritative for reads.
    """

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else None
        self._versions: dict[tuple[str, str], dict[str, PromptVersion]] = {}
        self._heads: dict[tuple[str, str], str] = {}

    def head(self, category: tuple[str, str]) -> PromptVersion:
        if category not in self._heads:
            self.commit(initial_version(category))
        return self._versions[category][self._heads[category]]

    def get(self, category: tuple[str, str], version_id: str) -> PromptVersion:
        return self._versions[category][version_id]

    def lineage(self, category: tuple[str, str]) -> list[PromptVersion]:
        """Versions from v1 to head, following parent pointers."""
        chain: list[PromptVersion] = []
        cursor: Optional[str] = self._heads.get(category)
        while cursor is not None:
            v = self._versions[category][cursor]
            chain.append(v)
            cursor = v.parent_version
        return list(reversed(chain))

    def commit(self, version: PromptVersion) -> PromptVersion:
        cat = version.category
        head_id = self._heads.get(cat)
        if version.parent_version != head_id:
            raise StaleVersionError(
                f"{cat}: parent {version.parent_version} is not head {head_id}")
        self._versions.setdefault(cat, {})[version.version_id] = version
        self._heads[cat] = version.version_id
        if self.root is not None:
            cat_dir = self.root / _category_key(cat)
            cat_dir.mkdir(parents=True, exist_ok=True)
            path = cat_dir / f"{version.version_id}.json"
            path.write_text(json.dumps(version_to_json(version), indent=2), encoding="utf-8")
            (cat_dir / "HEAD").write_text(version.version_id, encoding="utf-8")
        return version

    @classmethod
    def load(cls, root: Path) -> "PromptStore":
        store = cls(root)
        root = Path(root)
        if root.exists():
            for cat_dir in sorted(root.iterdir()):
                head_file = cat_dir / "HEAD"
                if not head_file.is_file():
                    continue
                versions = {}
                for vf in cat_dir.glob("v*.json"):
                    v = version_from_json(json.loads(vf.read_text(encoding="utf-8")))
                    versions[v.version_id] = v
                if versions:
                    cat = next(iter(versions.values())).category
                    store._versions[cat] = versions
                    store._heads[cat] = head_file.read_text(encoding="utf-8").strip()
        return store
