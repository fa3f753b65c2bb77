/** Thin typed client over the review-service HTTP JSON API.
 *
 * Every response is validated against the zod wire schemas; non-2xx
 * responses raise ApiError carrying the service's {code, message} body.
 */

import { z } from "zod";
import {
  CorrectionResult,
  DocumentView,
  ErrorBody,
  PromptLineage,
  Stats,
  TaskSummary,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

const QueueResponse = z.object({ tasks: z.array(TaskSummary) });

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    schema: z.ZodType<T>,
    path: string,
    init?: RequestInit,
  ): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body: unknown = await response.json();
    if (!response.ok) {
      const parsed = ErrorBody.safeParse(body);
      throw new ApiError(
        response.status,
        parsed.success ? parsed.data.message : `HTTP ${response.status}`,
      );
    }
    return schema.parse(body);
  }

  private post<T>(schema: z.ZodType<T>, path: string, payload: unknown): Promise<T> {
    return this.request(schema, path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async queue(status?: string): Promise<TaskSummary[]> {
    const suffix = status ? `?status=${encodeURIComponent(status)}` : "";
    return (await this.request(QueueResponse, `/queue${suffix}`)).tasks;
  }

  document(docId: string): Promise<DocumentView> {
    return this.request(DocumentView, `/documents/${encodeURIComponent(docId)}`);
  }

  submitCorrection(
    docId: string,
    field: string,
    value: string,
    reviewerId = "reviewer",
  ): Promise<CorrectionResult> {
    return this.post(CorrectionResult, `/documents/${encodeURIComponent(docId)}/corrections`, {
      field,
      value,
      reviewer_id: reviewerId,
    });
  }

  confirm(docId: string, reviewSeconds?: number): Promise<TaskSummary> {
    return this.post(TaskSummary, `/documents/${encodeURIComponent(docId)}/confirm`, {
      review_seconds: reviewSeconds ?? null,
    });
  }

  stats(): Promise<Stats> {
    return this.request(Stats, "/stats");
  }

  promptVersions(supplier: string, docType: string): Promise<PromptLineage> {
    return this.request(
      PromptLineage,
      `/prompts/${encodeURIComponent(supplier)}/${encodeURIComponent(docType)}/versions`,
    );
  }

  sustainability(scenario?: string): Promise<unknown> {
    const suffix = scenario ? `?scenario=${encodeURIComponent(scenario)}` : "";
    return this.request(z.unknown(), `/sustainability/report${suffix}`);
  }
}
