/** Wire types for the analysis service.
 *
 * These mirror the JSON the service returns field-for-field.  The workbench
 * never derives statistics of its own: every count, metric, and probability
 * shown on screen is read from one of these shapes.
 */

// --- datasets ---------------------------------------------------------------

export interface CleanReport {
  sentinel: Record<string, number>;
  out_of_range: Record<string, number>;
  total_cells: number;
  rows_touched: number;
}

export interface UploadResponse {
  dataset_id: string;
  n_rows: number;
  variables: string[];
  clean_report: CleanReport | null;
}

export interface CategoricalSummary {
  kind: "categorical";
  counts: Record<string, number>;
  percentages: Record<string, number>;
  n: number;
  n_missing: number;
}

export interface ContinuousSummary {
  kind: "continuous";
  min: number;
  max: number;
  mean: number;
  median: number;
  q1: number;
  q3: number;
  sd: number;
  n: number;
  n_missing: number;
}

export interface UnavailableSummary {
  kind: "unavailable";
  error: string;
}

export type ColumnSummary =
  | CategoricalSummary
  | ContinuousSummary
  | UnavailableSummary;

export interface DatasetSummary {
  dataset_id: string;
  n_rows: number;
  columns: Record<string, ColumnSummary>;
}

// --- cohorts ----------------------------------------------------------------

export type PredicateSpec =
  | { type: "equals"; value: string }
  | { type: "in_set"; values: string[] }
  | { type: "compare"; op: "<" | "<=" | ">" | ">="; threshold: number }
  | { type: "non_missing" };

export interface CriterionSpec {
  label: string;
  column: string;
  kind: "inclusion" | "exclusion";
  predicate: PredicateSpec;
}

export interface FlowStep {
  label: string;
  n_before: number;
  n_excluded: number;
  n_after: number;
}

export interface Flowchart {
  initial_n: number;
  final_n: number;
  steps: FlowStep[];
}

export interface MissingnessEntry {
  variable: string;
  test: string;
  statistic: number;
  df: number;
  p_value: number;
  n_complete: number;
  n_incomplete: number;
}

export interface MissingnessReport {
  entries: MissingnessEntry[];
  reason: string | null;
}

export interface CohortResponse {
  cohort_id: string;
  n_rows: number;
  flowchart: Flowchart;
  missingness: MissingnessReport;
}

// --- analysis jobs ----------------------------------------------------------

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface JobError {
  error: string;
  message: string;
}

export interface JobSnapshot<R> {
  job_id: string;
  kind: string;
  status: JobStatus;
  result?: R;
  error?: JobError;
}

export interface CausalReport {
  target: string;
  direct: string[];
  indirect: string[];
}

export interface BayesnetResult {
  nodes: string[];
  edges: [string, string][];
  score: number;
  family_scores: number[];
  config: Record<string, unknown>;
  causal?: CausalReport;
  artifact_id?: string;
}

export interface ConfusionCounts {
  tp: number;
  fp: number;
  tn: number;
  fn: number;
}

export interface GridCell {
  gamma: number;
  cost: number;
  confusion: ConfusionCounts | null;
  sensitivity: number | null;
  specificity: number | null;
  youden: number | null;
  error: string | null;
}

export interface GridResult {
  cells: GridCell[];
  best_index: number;
  k: number;
  seed: number;
}

export interface SvmGridJobResult {
  grid: GridResult;
  best: GridCell;
  artifact_id: string;
}

// --- models -----------------------------------------------------------------

export interface ModelSummary {
  artifact_id: string;
  kind: "bayesnet" | "svm";
  format_version: string;
  created_at: string;
  schema_fingerprint: string;
  training_metrics: Record<string, unknown>;
}

export interface InputField {
  name: string;
  kind: "categorical" | "continuous";
  categories?: string[];
  valid_range?: [number, number];
  sentinels?: string[];
  required: boolean;
}

export interface InputSchema {
  fields: InputField[];
  target: string | null;
}

export interface ModelDetail extends ModelSummary {
  input_schema: InputSchema;
}

export type Prediction =
  | { kind: "svm"; label: string; positive: boolean; decision_value: number }
  | { kind: "bayesnet"; target: string; distribution: Record<string, number> };

export interface PredictResponse {
  artifact_id: string;
  prediction: Prediction;
}

// --- errors -----------------------------------------------------------------

/** 422 payloads carry a structured detail naming the offending field. */
export interface ErrorDetail {
  error: string;
  message: string;
  column?: string;
  variable?: string;
  row?: number;
  value?: string;
}
