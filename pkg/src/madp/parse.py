"""Deterministic layout parsing: reading order, heading detection, pipe tables.

Produces a hierarchical markdown rendering of a logical unit. Page footers
(pagination, legal boilerplate) are treated as noise and excluded from the
markdown; the raw-token baseline is the naive concatenation of every block,
cell, and footer.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional

from .model import Page, TableGrid, TextBlock


@dataclass(frozen=True)
class LayoutHint:
    category: tuple[str, str]
    note: str


@dataclass(frozen=True)
class ParserConfig:
    column_gap_threshold: float = 0.15
    heading_font_ratio: float = 1.3
    table_render_style: str = "pipe"
    version: str = "p1"
    layout_hints: tuple[LayoutHint, ...] = ()

    def __post_init__(self):
        if self.column_gap_threshold <= 0 or self.heading_font_ratio <= 0:
            raise ValueError("parser thresholds must be positive")

    def with_hint(self, hint: LayoutHint) -> "ParserConfig":
        n = int(self.version.lstrip("p")) + 1
        return ParserConfig(
            column_gap_threshold=self.column_gap_threshold,
            heading_font_ratio=self.heading_font_ratio,
            table_render_style=self.table_render_style,
            version=f"p{n}",
            layout_hints=self.layout_hints + (hint,),
        )


@dataclass(frozen=True)
class ParsedDoc:
    unit_id: str
    markdown: str
    heading_outline: tuple[tuple[int, str], ...]
    raw_token_count: int
    parsed_token_count: int
    parser_config_version: str


def reading_order(blocks: list[TextBlock], config: ParserConfig) -> list[TextBlock]:
    """Cluster blocks into columns by x-center gaps, read columns left to right."""
    if not blocks:
        return []
    centers = sorted({b.x_center for b in blocks})
    boundaries = []  # upper edge of each column interval
    for prev, cur in zip(centers, centers[1:]):
        if cur - prev > config.column_gap_threshold:
            boundaries.append((prev + cur) / 2.0)

    def column_of(b: TextBlock) -> int:
        return sum(1 for edge in boundaries if b.x_center > edge)

    return sorted(blocks, key=lambda b: (column_of(b), b.y0, b.x0, b.text))


def _render_table(table: TableGrid) -> list[str]:
    lines = []
    header = table.row(0)
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join([" --- "] * table.cols) + "|")
    for i in range(1, table.rows):
        lines.append("| " + " | ".join(table.row(i)) + " |")
    return lines


def _heading_levels(blocks: list[TextBlock], config: ParserConfig) -> dict[float, int]:
    if not blocks:
        return {}
    median = statistics.median(b.font_size_hint for b in blocks)
    heading_sizes = sorted(
        {b.font_size_hint for b in blocks if b.font_size_hint >= config.heading_font_ratio * median},
        reverse=True,
    )
    return {size: min(rank + 1, 3) for rank, size in enumerate(heading_sizes)}


def naive_concatenation(pages: list[Page]) -> str:
    """Raw baseline: every block, cell, and footer in input order."""
    parts = []
    for page in pages:
        parts.extend(b.text for b in page.blocks)
        for table in page.tables:
            parts.extend(table.cells)
        if page.footer_text:
            parts.append(page.footer_text)
    return "\n".join(parts)


def _markdown_tokens(markdown: str) -> int:
    """Whitespace tokens with table/heading syntax excluded."""
    count = 0
    for line in markdown.splitlines():
        stripped = line.strip()
        if stripped.startswith("|") and set(stripped) <= {"|", "-", " "}:
            continue  # table separator row
        stripped = stripped.replace("|", " ").lstrip("#")
        count += len(stripped.split())
    return count


def render_markdown(unit_id: str, pages: list[Page], config: ParserConfig) -> ParsedDoc:
    all_blocks = [b for p in pages for b in p.blocks]
    levels = _heading_levels(all_blocks, config)
    lines: list[str] = []
    outline: list[tuple[int, str]] = []
    for page in pages:
        ordered = reading_order(list(page.blocks), config)
        tables = sorted(page.tables, key=lambda t: t.y0)
        ti = 0
        for block in ordered:
            while ti < len(tables) and tables[ti].y0 <= block.y0:
                lines.extend(_render_table(tables[ti]))
                ti += 1
            level = levels.get(block.font_size_hint)
            if level is not None:
                lines.append("#" * level + " " + block.text)
                outline.append((level, block.text))
            else:
                lines.append(block.text)
        for table in tables[ti:]:
            lines.extend(_render_table(table))
    markdown = "\n".join(lines)
    raw = naive_concatenation(pages)
    return ParsedDoc(
        unit_id=unit_id,
        markdown=markdown,
        heading_outline=tuple(outline),
        raw_token_count=len(raw.split()),
        parsed_token_count=_markdown_tokens(markdown),
        parser_config_version=config.version,
    )


def passthrough_parse(unit_id: str, pages: list[Page], config: ParserConfig) -> ParsedDoc:
    """Ablation stand-in: no layout analysis, markdown is the naive concatenation."""
    raw = naive_concatenation(pages)
    n = len(raw.split())
    return ParsedDoc(unit_id, raw, (), n, n, "passthrough")


class ExternalParserError(RuntimeError):
    pass


def parse_external(unit_id: str, pages: list[Page], config: ParserConfig,
                   fetch_markdown: Callable[[dict], str],
                   on_fallback: Optional[Callable[[str], None]] = None) -> ParsedDoc:
    """Delegate to an external layout engine; degrade to the reference renderer.

    `fetch_markdown` posts the unit payload and returns markdown; empty output
    or any exception counts as failure.
    """
    try:
        markdown = fetch_markdown({"unit_id": unit_id, "pages": len(pages)})
        if not markdown or not markdown.strip():
            raise ExternalParserError("external parser returned empty markdown")
    except Exception as exc:
        if on_fallback is not None:
            on_fallback(f"external parser failed, using reference renderer: {exc}")
        return render_markdown(unit_id, pages, config)
    raw = naive_concatenation(pages)
    return ParsedDoc(
        unit_id=unit_id,
        markdown=markdown,
        heading_outline=(),
        raw_token_count=len(raw.split()),
        parsed_token_count=_markdown_tokens(markdown),
        parser_config_version=f"external:{config.version}",
    )
