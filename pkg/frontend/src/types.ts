/** Wire types for the review-service JSON API, validated with zod. */

import { z } from "zod";

/** Sentinel the service uses for a value no backend produced. */
export const MISSING = "__MISSING__";

export const TaskSummary = z.object({
  doc_id: z.string(),
  category: z.tuple([z.string(), z.string()]),
  status: z.enum(["pending", "in_progress", "resolved"]),
  opened_at: z.string(),
  reasons: z.array(z.string()),
  resolved_at: z.string().nullable(),
  review_seconds: z.number().nullable(),
  resolution: z.string().nullable(),
});
export type TaskSummary = z.infer<typeof TaskSummary>;

export const FieldValue = z.object({
  field: z.string(),
  raw: z.string(),
  normalized: z.string(),
  confidence: z.number(),
  backend_id: z.string(),
  prompt_version: z.string(),
  kind: z.string(),
});
export type FieldValue = z.infer<typeof FieldValue>;

export const FieldRecord = z.object({
  field: z.string(),
  chosen: FieldValue,
  agreement: z.enum(["unanimous", "majority", "split", "single"]),
  flagged: z.boolean(),
});
export type FieldRecord = z.infer<typeof FieldRecord>;

export const FieldSchemaEntry = z.object({
  name: z.string(),
  kind: z.string(),
  required: z.boolean(),
  admissible_values: z.array(z.string()).nullable(),
});
export type FieldSchemaEntry = z.infer<typeof FieldSchemaEntry>;

export const CheckOutcome = z.object({
  check_id: z.string(),
  status: z.enum(["pass", "fail", "skipped"]),
  detail: z.string(),
  affected_fields: z.array(z.string()),
});
export type CheckOutcome = z.infer<typeof CheckOutcome>;

export const ValidationReport = z.object({
  doc_id: z.string(),
  outcomes: z.array(CheckOutcome),
  adjusted: z.array(FieldValue),
  routing: z.object({ route: z.string(), reasons: z.array(z.string()) }),
});
export type ValidationReport = z.infer<typeof ValidationReport>;

export const DocumentView = z.object({
  doc_id: z.string(),
  category: z.tuple([z.string(), z.string()]),
  stage: z.string(),
  markdown: z.string(),
  prompt_version: z.string().nullable(),
  fields: z.array(FieldRecord),
  report: ValidationReport.nullable(),
  thresholds: z.record(z.string(), z.number()),
  schema: z.array(FieldSchemaEntry),
  task: TaskSummary.nullable(),
});
export type DocumentView = z.infer<typeof DocumentView>;

export const CorrectionResult = z.object({
  task: TaskSummary,
  inherited: z.number(),
  prompt_version: z.string().nullable().optional(),
  document: DocumentView,
});
export type CorrectionResult = z.infer<typeof CorrectionResult>;

export const Stats = z.object({
  total_docs: z.number(),
  ai_completed: z.number(),
  fallback_docs: z.number(),
  review_rate: z.number().nullable(),
  automation_rate: z.number().nullable(),
  avg_review_seconds: z.number().nullable(),
});
export type Stats = z.infer<typeof Stats>;

export const PromptLineage = z.object({
  category: z.tuple([z.string(), z.string()]),
  head: z.string(),
  versions: z.array(
    z.object({
      version_id: z.string(),
      parent_version: z.string().nullable(),
      examples: z.array(z.unknown()),
    }).passthrough(),
  ),
});
export type PromptLineage = z.infer<typeof PromptLineage>;

export const ErrorBody = z.object({ code: z.number(), message: z.string() });
export type ErrorBody = z.infer<typeof ErrorBody>;

/** A field is highlighted when flagged by consensus or below its threshold. */
export function needsAttention(record: FieldRecord, threshold: number): boolean {
  return record.flagged || record.chosen.confidence < threshold;
}
