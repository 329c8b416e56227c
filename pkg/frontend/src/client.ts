/** Thin HTTP client for the analysis service.
 *
 * Every method maps to exactly one endpoint and returns the parsed response
 * body unchanged, so callers see the service's own numbers.  Failures raise
 * `ApiError` carrying the HTTP status and the structured `detail` payload
 * when the service provided one.
 */

import type {
  CohortResponse,
  CriterionSpec,
  DatasetSummary,
  ErrorDetail,
  Flowchart,
  JobSnapshot,
  ModelDetail,
  ModelSummary,
  PredictResponse,
  UploadResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: ErrorDetail | null;

  constructor(status: number, detail: ErrorDetail | null, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

async function parseError(res: Response): Promise<never> {
  let detail: ErrorDetail | null = null;
  let message = `HTTP ${res.status}`;
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (body && typeof body.detail === "object" && body.detail !== null) {
      detail = body.detail as ErrorDetail;
      message = `${detail.error}: ${detail.message}`;
    } else if (body && typeof body.detail === "string") {
      message = body.detail;
    }
  } catch {
    // Non-JSON error body; keep the bare status message.
  }
  throw new ApiError(res.status, detail, message);
}

async function expectJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    await parseError(res);
  }
  return (await res.json()) as T;
}

export interface PollOptions {
  /** First delay in ms; doubles each poll. */
  initialDelayMs?: number;
  /** Ceiling for the doubling delay. */
  maxDelayMs?: number;
  /** Give up after this many polls. */
  maxPolls?: number;
  /** Injectable sleep for tests. */
  sleep?: (ms: number) => Promise<void>;
}

/** Delay before the n-th poll (0-based): doubles from `initial`, capped. */
export function backoffDelay(
  poll: number,
  initial = 100,
  max = 2000,
): number {
  return Math.min(initial * 2 ** poll, max);
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class WorkbenchClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return expectJson<T>(res);
  }

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(this.baseUrl + path);
    return expectJson<T>(res);
  }

  uploadDataset(body: {
    csv: string;
    schema: unknown;
    clean_sentinels?: boolean;
    source?: string;
  }): Promise<UploadResponse> {
    return this.post<UploadResponse>("/datasets", body);
  }

  datasetSummary(datasetId: string): Promise<DatasetSummary> {
    return this.get<DatasetSummary>(
      `/datasets/${encodeURIComponent(datasetId)}/summary`,
    );
  }

  buildCohort(body: {
    dataset_id?: string;
    cohort_id?: string;
    criteria: CriterionSpec[];
    analysis_vars: string[];
  }): Promise<CohortResponse> {
    return this.post<CohortResponse>("/cohorts", body);
  }

  getCohortFlowchart(
    cohortId: string,
  ): Promise<{ cohort_id: string; flowchart: Flowchart }> {
    return this.get<{ cohort_id: string; flowchart: Flowchart }>(
      `/cohorts/${encodeURIComponent(cohortId)}/flowchart`,
    );
  }

  startBayesnet(body: {
    dataset_id?: string;
    cohort_id?: string;
    variables: string[];
    target?: string;
    alpha?: number;
    config?: {
      max_parents?: number;
      restarts?: number;
      seed?: number;
      forbidden?: [string, string][];
      required?: [string, string][];
    };
  }): Promise<{ job_id: string }> {
    return this.post<{ job_id: string }>("/analyses/bayesnet", body);
  }

  startSvmGrid(body: {
    dataset_id?: string;
    cohort_id?: string;
    feature_vars: string[];
    label_var: string;
    positive_label?: string;
    gammas?: number[];
    costs?: number[];
    folds?: number;
    seed?: number;
    class_weights?: [number, number];
  }): Promise<{ job_id: string }> {
    return this.post<{ job_id: string }>("/analyses/svm-grid", body);
  }

  getJob<R>(jobId: string): Promise<JobSnapshot<R>> {
    return this.get<JobSnapshot<R>>(`/jobs/${encodeURIComponent(jobId)}`);
  }

  listModels(): Promise<{ models: ModelSummary[] }> {
    return this.get<{ models: ModelSummary[] }>("/models");
  }

  getModel(artifactId: string): Promise<ModelDetail> {
    return this.get<ModelDetail>(
      `/models/${encodeURIComponent(artifactId)}`,
    );
  }

  predict(
    artifactId: string,
    record: Record<string, string | number>,
  ): Promise<PredictResponse> {
    return this.post<PredictResponse>(
      `/models/${encodeURIComponent(artifactId)}/predict`,
      { record },
    );
  }

  /** Poll a job until it settles, with doubling backoff capped at 2s.
   *
   * Returns the final snapshot whether the job finished `done` or `failed`;
   * the caller decides how to surface failures.
   */
  async pollJob<R>(
    jobId: string,
    options: PollOptions = {},
  ): Promise<JobSnapshot<R>> {
    const {
      initialDelayMs = 100,
      maxDelayMs = 2000,
      maxPolls = 200,
      sleep = defaultSleep,
    } = options;
    for (let poll = 0; poll < maxPolls; poll += 1) {
      const snapshot = await this.getJob<R>(jobId);
      if (snapshot.status === "done" || snapshot.status === "failed") {
        return snapshot;
      }
      await sleep(backoffDelay(poll, initialDelayMs, maxDelayMs));
    }
    throw new Error(`job ${jobId} did not settle after ${maxPolls} polls`);
  }
}
