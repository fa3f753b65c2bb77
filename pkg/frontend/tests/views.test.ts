import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderBanner,
  renderDocument,
  renderField,
  renderNotification,
  renderQueue,
  renderStats,
} from "../src/views";
import { documentView, task } from "./fixtures";

describe("renderQueue", () => {
  it("shows an empty state", () => {
    expect(renderQueue([])).toContain("Review queue is empty");
  });

  it("renders one row per pending task with category and reasons", () => {
    const html = renderQueue([
      task(),
      task({ doc_id: "tyrell-02", reasons: ["backends disagree on notes"] }),
    ]);
    expect(html.match(/class="queue-row"/g)).toHaveLength(2);
    expect(html).toContain("TYRELL / invoice");
    expect(html).toContain("invoice_number missing");
    expect(html).toContain("backends disagree on notes");
  });
});

describe("renderField", () => {
  const doc = documentView();

  it("highlights a field below its threshold", () => {
    const total = doc.fields.find((f) => f.field === "total_amount")!; // 0.80
    expect(renderField(total, 0.85)).toContain("low-confidence");
  });

  it("does not highlight a confident field", () => {
    const date = doc.fields.find((f) => f.field === "invoice_date")!; // 0.99
    expect(renderField(date, 0.85)).not.toContain("low-confidence");
  });

  it("highlights consensus-split fields regardless of confidence", () => {
    const currency = doc.fields.find((f) => f.field === "currency")!; // 0.95, flagged
    const html = renderField(currency, 0.85);
    expect(html).toContain("low-confidence");
    expect(html).toContain("backends disagree");
  });

  it("shows a raw-vs-normalized diff when they differ", () => {
    const total = doc.fields.find((f) => f.field === "total_amount")!;
    const html = renderField(total, 0.85);
    expect(html).toContain("<del>122,00</del>");
    expect(html).toContain("<ins>12200 EUR</ins>");
  });

  it("uses a selection menu limited to admissible values", () => {
    const currency = doc.fields.find((f) => f.field === "currency")!;
    const schema = doc.schema.find((s) => s.name === "currency")!;
    const html = renderField(currency, 0.85, schema);
    expect(html).toContain("<select");
    expect(html.match(/<option/g)).toHaveLength(3);
    expect(html).toContain('<option value="EUR" selected>');
    expect(html).not.toContain("<input");
  });
});

describe("renderDocument", () => {
  it("renders markdown and field panes side by side", () => {
    const html = renderDocument(documentView());
    expect(html).toContain("markdown-pane");
    expect(html).toContain("field-pane");
    expect(html).toContain("TYRELL S.p.A.");
    expect(html).toContain('data-field="total_amount"');
    expect(html).toContain('class="confirm"');
  });

  it("escapes markup coming from the service", () => {
    const html = renderDocument(documentView({ markdown: "<script>alert(1)</script>" }));
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("banners and stats", () => {
  it("renders an error banner", () => {
    expect(renderBanner("task already resolved")).toContain("task already resolved");
    expect(renderBanner("<b>")).toContain("&lt;b&gt;");
  });

  it("pluralizes the inheritance notification", () => {
    expect(renderNotification(1)).toContain("1 pending document updated");
    expect(renderNotification(3)).toContain("3 pending documents updated");
  });

  it("renders stats with null-safe formatting", () => {
    const html = renderStats({ total_docs: 3, automation_rate: 1, avg_review_seconds: null });
    expect(html).toContain("100.0%");
    expect(html).toContain("n/a");
  });
});

describe("escapeHtml", () => {
  it("escapes all five special characters", () => {
    expect(escapeHtml(`<a href="x" title='y'>&</a>`)).toBe(
      "&lt;a href=&quot;x&quot; title=&#39;y&#39;&gt;&amp;&lt;/a&gt;",
    );
  });
});
