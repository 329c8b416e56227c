/** What-if panel: a form shaped by the model's input schema, and a verbatim
 * rendering of whatever the predict endpoint returns.
 *
 * Categorical fields offer the artifact's category list; continuous fields
 * carry the declared valid range as input bounds.  Submission stays
 * disabled until every required field is filled and every number parses.
 */

import type { InputSchema, Prediction } from "../types.js";

export interface FormField {
  name: string;
  kind: "categorical" | "continuous";
  /** Choices for categorical fields; null for free numeric input. */
  options: string[] | null;
  range: [number, number] | null;
  required: boolean;
  /** Raw input text; empty string means unset. */
  value: string;
}

export interface WhatIfForm {
  fields: FormField[];
  /** Required fields still empty. */
  missing: string[];
  /** Continuous fields whose text does not parse as a number. */
  invalid: string[];
  canSubmit: boolean;
}

export function buildForm(
  schema: InputSchema,
  values: Record<string, string>,
): WhatIfForm {
  const fields = schema.fields.map((f) => ({
    name: f.name,
    kind: f.kind,
    options: f.kind === "categorical" ? (f.categories ?? []) : null,
    range: f.valid_range ?? null,
    required: f.required,
    value: values[f.name] ?? "",
  }));
  const missing = fields
    .filter((f) => f.required && f.value === "")
    .map((f) => f.name);
  const invalid = fields
    .filter(
      (f) =>
        f.kind === "continuous" &&
        f.value !== "" &&
        !Number.isFinite(Number(f.value)),
    )
    .map((f) => f.name);
  return {
    fields,
    missing,
    invalid,
    canSubmit: missing.length === 0 && invalid.length === 0,
  };
}

/** The record to POST: numbers for continuous fields, labels otherwise.
 * Empty optional fields are omitted rather than sent as empty strings.
 */
export function formRecord(form: WhatIfForm): Record<string, string | number> {
  const record: Record<string, string | number> = {};
  for (const field of form.fields) {
    if (field.value === "") {
      continue;
    }
    record[field.name] =
      field.kind === "continuous" ? Number(field.value) : field.value;
  }
  return record;
}

export interface PredictionLine {
  label: string;
  value: string;
}

export interface PredictionView {
  kind: "svm" | "bayesnet";
  lines: PredictionLine[];
}

/** Lay the prediction out line by line, values copied verbatim. */
export function renderPrediction(prediction: Prediction): PredictionView {
  if (prediction.kind === "svm") {
    return {
      kind: "svm",
      lines: [
        { label: "label", value: prediction.label },
        { label: "decision value", value: String(prediction.decision_value) },
        { label: "positive", value: prediction.positive ? "yes" : "no" },
      ],
    };
  }
  const lines: PredictionLine[] = [
    { label: "target", value: prediction.target },
  ];
  for (const [category, probability] of Object.entries(
    prediction.distribution,
  )) {
    lines.push({ label: `p(${category})`, value: String(probability) });
  }
  return { kind: "bayesnet", lines };
}
