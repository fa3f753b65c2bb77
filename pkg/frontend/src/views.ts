/** Pure HTML renderers for the review console.
 *
 * Every function maps service JSON to an HTML string with no hidden state,
 * so reloading from the server always reproduces the same view and the
 * renderers are testable without a DOM.
 */

import {
  DocumentView,
  FieldRecord,
  FieldSchemaEntry,
  MISSING,
  TaskSummary,
  needsAttention,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function renderQueue(tasks: TaskSummary[]): string {
  if (tasks.length === 0) {
    return `<p class="empty-state">Review queue is empty.</p>`;
  }
  const rows = tasks.map((task) => {
    const [supplier, docType] = task.category;
    const reasons = task.reasons.map((r) => escapeHtml(r)).join("; ");
    return (
      `<tr class="queue-row" data-doc-id="${escapeHtml(task.doc_id)}">` +
      `<td class="doc-id">${escapeHtml(task.doc_id)}</td>` +
      `<td class="category">${escapeHtml(supplier)} / ${escapeHtml(docType)}</td>` +
      `<td class="status">${escapeHtml(task.status)}</td>` +
      `<td class="reasons">${reasons}</td>` +
      `</tr>`
    );
  });
  return (
    `<table class="queue"><thead><tr>` +
    `<th>Document</th><th>Category</th><th>Status</th><th>Reasons</th>` +
    `</tr></thead><tbody>${rows.join("")}</tbody></table>`
  );
}

function displayValue(value: string): string {
  return value === MISSING ? "(missing)" : value;
}

function renderEditor(record: FieldRecord, schema?: FieldSchemaEntry): string {
  const field = escapeHtml(record.field);
  if (schema?.admissible_values && schema.admissible_values.length > 0) {
    const options = schema.admissible_values
      .map((v) => {
        const selected = v === record.chosen.normalized ? " selected" : "";
        return `<option value="${escapeHtml(v)}"${selected}>${escapeHtml(v)}</option>`;
      })
      .join("");
    return `<select class="field-editor" data-field="${field}">${options}</select>`;
  }
  const current = record.chosen.normalized === MISSING ? "" : record.chosen.normalized;
  return (
    `<input class="field-editor" data-field="${field}" ` +
    `value="${escapeHtml(current)}">`
  );
}

export function renderField(
  record: FieldRecord,
  threshold: number,
  schema?: FieldSchemaEntry,
): string {
  const highlighted = needsAttention(record, threshold);
  const classes = highlighted ? "field low-confidence" : "field";
  const raw = displayValue(record.chosen.raw);
  const normalized = displayValue(record.chosen.normalized);
  const diff =
    record.chosen.raw === record.chosen.normalized
      ? `<span class="value">${escapeHtml(normalized)}</span>`
      : `<span class="diff"><del>${escapeHtml(raw)}</del> ` +
        `<ins>${escapeHtml(normalized)}</ins></span>`;
  return (
    `<div class="${classes}" data-field="${escapeHtml(record.field)}">` +
    `<span class="name">${escapeHtml(record.field)}</span> ${diff} ` +
    `<span class="confidence">${record.chosen.confidence.toFixed(2)}</span>` +
    (record.flagged ? `<span class="flag">backends disagree</span>` : "") +
    renderEditor(record, schema) +
    `<button class="correct" data-field="${escapeHtml(record.field)}">Correct</button>` +
    `</div>`
  );
}

export function renderDocument(view: DocumentView): string {
  const schemaByName = new Map(view.schema.map((s) => [s.name, s]));
  const fields = view.fields
    .map((record) =>
      renderField(record, view.thresholds[record.field] ?? 0, schemaByName.get(record.field)),
    )
    .join("");
  const reasons = view.task
    ? view.task.reasons.map((r) => `<li>${escapeHtml(r)}</li>`).join("")
    : "";
  return (
    `<div class="document" data-doc-id="${escapeHtml(view.doc_id)}">` +
    `<section class="markdown-pane"><pre>${escapeHtml(view.markdown)}</pre></section>` +
    `<section class="field-pane">` +
    (reasons ? `<ul class="reasons">${reasons}</ul>` : "") +
    fields +
    `<button class="confirm">Confirm all</button>` +
    `</section></div>`
  );
}

export function renderBanner(message: string): string {
  return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderNotification(inherited: number): string {
  const noun = inherited === 1 ? "document" : "documents";
  return (
    `<div class="banner info">${inherited} pending ${noun} updated ` +
    `from this correction</div>`
  );
}

export function renderStats(stats: {
  total_docs: number;
  automation_rate: number | null;
  avg_review_seconds: number | null;
}): string {
  const automation =
    stats.automation_rate === null ? "n/a" : `${(stats.automation_rate * 100).toFixed(1)}%`;
  const review =
    stats.avg_review_seconds === null ? "n/a" : `${stats.avg_review_seconds.toFixed(1)} s`;
  return (
    `<dl class="stats">` +
    `<dt>Documents</dt><dd>${stats.total_docs}</dd>` +
    `<dt>Automation</dt><dd>${automation}</dd>` +
    `<dt>Avg review</dt><dd>${review}</dd>` +
    `</dl>`
  );
}
