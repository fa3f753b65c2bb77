/** Canned wire payloads and an in-memory fake of the review service. */

import { DocumentView, TaskSummary } from "../src/types";

export function task(overrides: Partial<TaskSummary> = {}): TaskSummary {
  return {
    doc_id: "tyrell-01",
    category: ["TYRELL", "invoice"],
    status: "pending",
    opened_at: "2026-08-23T10:00:00+00:00",
    reasons: ["invoice_number missing"],
    resolved_at: null,
    review_seconds: null,
    resolution: null,
    ...overrides,
  };
}

export function documentView(overrides: Partial<DocumentView> = {}): DocumentView {
  return {
    doc_id: "tyrell-01",
    category: ["TYRELL", "invoice"],
    stage: "in_review",
    markdown: "# TYRELL S.p.A.\n\n| description | line_total |\n| --- | --- |\n| Widget | 100.00 |",
    prompt_version: "v1",
    fields: [
      {
        field: "invoice_date",
        chosen: {
          field: "invoice_date",
          raw: "03/01/2026",
          normalized: "2026-01-03",
          confidence: 0.99,
          backend_id: "m1",
          prompt_version: "v1",
          kind: "date",
        },
        agreement: "single",
        flagged: false,
      },
      {
        field: "total_amount",
        chosen: {
          field: "total_amount",
          raw: "122,00",
          normalized: "12200 EUR",
          confidence: 0.8,
          backend_id: "m1",
          prompt_version: "v1",
          kind: "money",
        },
        agreement: "single",
        flagged: false,
      },
      {
        field: "currency",
        chosen: {
          field: "currency",
          raw: "EUR",
          normalized: "EUR",
          confidence: 0.95,
          backend_id: "m1",
          prompt_version: "v1",
          kind: "currency_code",
        },
        agreement: "split",
        flagged: true,
      },
    ],
    report: null,
    thresholds: { invoice_date: 0.85, total_amount: 0.85, currency: 0.85 },
    schema: [
      { name: "invoice_date", kind: "date", required: true, admissible_values: null },
      { name: "total_amount", kind: "money", required: true, admissible_values: null },
      { name: "currency", kind: "currency_code", required: true, admissible_values: ["EUR", "GBP", "USD"] },
    ],
    task: task(),
    ...overrides,
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Minimal stateful stand-in for the service, driven through fetch(). */
export class FakeService {
  doc: DocumentView = documentView();
  resolved = false;
  readonly calls: { url: string; body?: unknown }[] = [];

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.calls.push({ url, body });
    const path = url.replace(/^https?:\/\/[^/]+/, "");

    if (path.startsWith("/queue")) {
      const tasks = this.resolved || !this.doc.task ? [] : [this.doc.task];
      return json(200, { tasks });
    }
    if (path === `/documents/${this.doc.doc_id}` && !init?.method) {
      return json(200, this.doc);
    }
    if (path === `/documents/${this.doc.doc_id}/corrections`) {
      if (this.resolved) return json(409, { code: 409, message: "task already resolved" });
      const fields = this.doc.fields.map((record) =>
        record.field === body.field
          ? {
              ...record,
              flagged: false,
              chosen: {
                ...record.chosen,
                raw: body.value,
                normalized: body.value,
                confidence: 1.0,
                backend_id: "human",
              },
            }
          : record,
      );
      this.doc = { ...this.doc, fields };
      return json(200, { task: this.doc.task, inherited: 1, document: this.doc });
    }
    if (path === `/documents/${this.doc.doc_id}/confirm`) {
      if (this.resolved) return json(409, { code: 409, message: "task already resolved" });
      this.resolved = true;
      return json(200, { ...this.doc.task!, status: "resolved", resolution: "confirmed" });
    }
    return json(404, { code: 404, message: `unknown document '${path}'` });
  };
}
