/** Workbench session state.
 *
 * One instance backs the whole UI: the active dataset, the criteria draft,
 * the latest flowchart, analysis job tracking, and the inputs each view
 * renders from.  All numbers stored here came out of a service response;
 * the mutations below only copy them into place.
 */

import { ApiError, WorkbenchClient } from "./client.js";
import type {
  BayesnetResult,
  CohortResponse,
  CriterionSpec,
  DatasetSummary,
  Flowchart,
  JobError,
  JobSnapshot,
  JobStatus,
  MissingnessReport,
  ModelDetail,
  SvmGridJobResult,
} from "./types.js";

export interface CriterionDraft {
  spec: CriterionSpec;
  /** Inline validation message from the service, shown at this criterion. */
  error: string | null;
}

export type AnalysisKind = "bayesnet" | "svm-grid";

export interface JobTracker<R> {
  /** The job the UI currently cares about; older ids are stale. */
  jobId: string | null;
  status: JobStatus | null;
  result: R | null;
  error: JobError | null;
}

function emptyTracker<R>(): JobTracker<R> {
  return { jobId: null, status: null, result: null, error: null };
}

export class WorkbenchState {
  datasetId: string | null = null;
  summary: DatasetSummary | null = null;

  criteria: CriterionDraft[] = [];
  /** Error not attributable to a single criterion (e.g. missing dataset). */
  cohortError: string | null = null;
  cohortId: string | null = null;
  flowchart: Flowchart | null = null;
  missingness: MissingnessReport | null = null;

  bayesnet: JobTracker<BayesnetResult> = emptyTracker();
  svmGrid: JobTracker<SvmGridJobResult> = emptyTracker();

  /** Target picked in the network view; highlights derive from the result. */
  causalTarget: string | null = null;
  /** Index of the heatmap cell whose details panel is open. */
  selectedCellIndex: number | null = null;

  whatIfModel: ModelDetail | null = null;
  whatIfValues: Record<string, string> = {};

  // --- dataset -------------------------------------------------------------

  setDataset(datasetId: string, summary: DatasetSummary): void {
    this.datasetId = datasetId;
    this.summary = summary;
    this.cohortId = null;
    this.flowchart = null;
    this.missingness = null;
  }

  // --- criteria draft --------------------------------------------------------

  addCriterion(spec: CriterionSpec): void {
    this.criteria.push({ spec, error: null });
  }

  updateCriterion(index: number, spec: CriterionSpec): void {
    const draft = this.criteria[index];
    if (draft) {
      draft.spec = spec;
      draft.error = null;
    }
  }

  removeCriterion(index: number): void {
    this.criteria.splice(index, 1);
  }

  clearCriteria(): void {
    this.criteria = [];
  }

  // --- cohort responses ------------------------------------------------------

  applyCohortSuccess(response: CohortResponse): void {
    this.cohortId = response.cohort_id;
    this.flowchart = response.flowchart;
    this.missingness = response.missingness;
    this.cohortError = null;
    for (const draft of this.criteria) {
      draft.error = null;
    }
  }

  /** Pin a service rejection to the criterion it names; flowchart untouched.
   *
   * The service identifies the offender either by a `column` field on the
   * error detail or by quoting the criterion label in the message.  When
   * neither matches a draft the message lands on the form-level slot.
   */
  applyCohortFailure(err: ApiError): void {
    const message = err.detail
      ? `${err.detail.error}: ${err.detail.message}`
      : err.message;
    const column = err.detail?.column;
    let index = -1;
    if (column !== undefined) {
      index = this.criteria.findIndex((d) => d.spec.column === column);
    }
    if (index < 0 && err.detail) {
      index = this.criteria.findIndex((d) =>
        err.detail!.message.includes(`criterion '${d.spec.label}'`),
      );
    }
    if (index >= 0) {
      this.criteria[index]!.error = message;
    } else {
      this.cohortError = message;
    }
  }

  // --- analysis jobs ---------------------------------------------------------

  private tracker(kind: AnalysisKind): JobTracker<unknown> {
    return kind === "bayesnet" ? this.bayesnet : this.svmGrid;
  }

  trackJob(kind: AnalysisKind, jobId: string): void {
    const t = this.tracker(kind);
    t.jobId = jobId;
    t.status = "queued";
    t.result = null;
    t.error = null;
  }

  /** Fold a poll response into the state.
   *
   * Snapshots for any job other than the one currently tracked are stale
   * (the user restarted the analysis while a poll was in flight) and are
   * dropped.  Returns whether the snapshot was applied.
   */
  applyJobSnapshot(kind: AnalysisKind, snapshot: JobSnapshot<unknown>): boolean {
    const t = this.tracker(kind);
    if (snapshot.job_id !== t.jobId) {
      return false;
    }
    t.status = snapshot.status;
    if (snapshot.status === "done") {
      t.result = snapshot.result ?? null;
      t.error = null;
    } else if (snapshot.status === "failed") {
      t.result = null;
      t.error = snapshot.error ?? null;
    }
    return true;
  }

  // --- view selections ---------------------------------------------------------

  selectCausalTarget(target: string | null): void {
    this.causalTarget = target;
  }

  selectCell(index: number | null): void {
    this.selectedCellIndex = index;
  }

  // --- what-if form ------------------------------------------------------------

  openWhatIf(model: ModelDetail): void {
    this.whatIfModel = model;
    this.whatIfValues = {};
  }

  setWhatIfValue(field: string, value: string): void {
    this.whatIfValues[field] = value;
  }
}

// --- orchestration -------------------------------------------------------------

/** Build a cohort from the current draft and fold the outcome into state.
 *
 * On success the flowchart is replaced with the service's rendering input
 * verbatim; on a 422 the message is pinned inline and the previous
 * flowchart stays on screen.  Returns whether the submission succeeded.
 */
export async function submitCriteria(
  client: WorkbenchClient,
  state: WorkbenchState,
  analysisVariables: string[],
): Promise<boolean> {
  if (state.datasetId === null) {
    state.cohortError = "no dataset loaded";
    return false;
  }
  try {
    const response = await client.buildCohort({
      dataset_id: state.datasetId,
      criteria: state.criteria.map((d) => d.spec),
      analysis_vars: analysisVariables,
    });
    state.applyCohortSuccess(response);
    return true;
  } catch (err) {
    if (err instanceof ApiError) {
      state.applyCohortFailure(err);
      return false;
    }
    throw err;
  }
}

/** Start an analysis job and poll it to rest, discarding stale snapshots. */
export async function runAnalysis(
  client: WorkbenchClient,
  state: WorkbenchState,
  kind: AnalysisKind,
  start: () => Promise<{ job_id: string }>,
  pollOptions: Parameters<WorkbenchClient["pollJob"]>[1] = {},
): Promise<boolean> {
  const { job_id } = await start();
  state.trackJob(kind, job_id);
  const snapshot = await client.pollJob(job_id, pollOptions);
  return state.applyJobSnapshot(kind, snapshot);
}
