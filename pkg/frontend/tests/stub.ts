/** In-process stand-in for the analysis service.
 *
 * Serves the same routes with the same JSON shapes, backed by canned
 * fixtures the tests can swap out.  Jobs advance through a scripted status
 * sequence, one step per poll, so polling behaviour is observable without
 * real work or timers on the server side.
 */

import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";
import type {
  BayesnetResult,
  CohortResponse,
  CriterionSpec,
  DatasetSummary,
  ErrorDetail,
  JobError,
  JobStatus,
  ModelDetail,
  PredictResponse,
  SvmGridJobResult,
  UploadResponse,
} from "../src/types.js";

// --- default fixtures ---------------------------------------------------------

export const defaultUpload: UploadResponse = {
  dataset_id: "ds-0001",
  n_rows: 400,
  variables: ["a", "b", "c", "prior_flag"],
  clean_report: {
    sentinel: {},
    out_of_range: {},
    total_cells: 0,
    rows_touched: 0,
  },
};

export const defaultSummary: DatasetSummary = {
  dataset_id: "ds-0001",
  n_rows: 400,
  columns: {
    a: {
      kind: "categorical",
      counts: { x: 240, y: 160 },
      percentages: { x: 60.0, y: 40.0 },
      n: 400,
      n_missing: 0,
    },
    c: {
      kind: "continuous",
      min: 0.0,
      max: 96.0,
      mean: 12.5,
      median: 3.0,
      q1: 1.0,
      q3: 11.0,
      sd: 19.2,
      n: 380,
      n_missing: 20,
    },
  },
};

export const defaultCohort: CohortResponse = {
  cohort_id: "co-0001",
  n_rows: 350,
  flowchart: {
    initial_n: 400,
    final_n: 350,
    steps: [
      { label: "prior record", n_before: 400, n_excluded: 30, n_after: 370 },
      { label: "incomplete data", n_before: 370, n_excluded: 20, n_after: 350 },
    ],
  },
  missingness: {
    entries: [
      {
        variable: "c",
        test: "mann-whitney",
        statistic: 3371.5,
        df: 1,
        p_value: 0.42,
        n_complete: 350,
        n_incomplete: 20,
      },
    ],
    reason: null,
  },
};

/** Empty criteria list: only the complete-case step remains. */
export const completeCaseOnlyCohort: CohortResponse = {
  cohort_id: "co-0002",
  n_rows: 380,
  flowchart: {
    initial_n: 400,
    final_n: 380,
    steps: [
      { label: "incomplete data", n_before: 400, n_excluded: 20, n_after: 380 },
    ],
  },
  missingness: { entries: [], reason: "fewer than 2 incomplete rows" },
};

export const defaultBayesnetResult: BayesnetResult = {
  nodes: ["a", "b", "c"],
  edges: [["a", "b"]],
  score: -645.8170784016681,
  family_scores: [-210.4, -290.9, -144.5],
  config: {
    max_parents: 5,
    restarts: 5,
    seed: 0,
    forbidden: [],
    required: [],
  },
  causal: { target: "b", direct: ["a"], indirect: [] },
  artifact_id: "bayesnet-7a310eef214d",
};

// Confusion counts chosen so the one-decimal percent renderings are
// 90.1% sensitivity and 99.9% specificity.
export const headlineCell = {
  gamma: 0.01,
  cost: 10.0,
  confusion: { tp: 91, fp: 1, tn: 1364, fn: 10 },
  sensitivity: 91 / 101,
  specificity: 1364 / 1365,
  youden: 91 / 101 + 1364 / 1365 - 1,
  error: null,
};

export const defaultSvmResult: SvmGridJobResult = {
  grid: {
    cells: [
      {
        gamma: 0.5,
        cost: 1.0,
        confusion: { tp: 83, fp: 72, tn: 173, fn: 22 },
        sensitivity: 0.7904761904761904,
        specificity: 0.7061224489795919,
        youden: 0.4965986394557823,
        error: null,
      },
      headlineCell,
    ],
    best_index: 1,
    k: 3,
    seed: 0,
  },
  best: headlineCell,
  artifact_id: "svm-2c3f5b8a91d0",
};

export const defaultModels: ModelDetail[] = [
  {
    artifact_id: "svm-2c3f5b8a91d0",
    kind: "svm",
    format_version: "1",
    created_at: "2026-08-14T10:00:00+00:00",
    schema_fingerprint: "88a1c2d3e4f50617",
    training_metrics: { n_support: 42 },
    input_schema: {
      fields: [
        {
          name: "a",
          kind: "categorical",
          categories: ["x", "y"],
          required: true,
        },
        {
          name: "c",
          kind: "continuous",
          valid_range: [0.0, 96.0],
          required: true,
        },
      ],
      target: null,
    },
  },
  {
    artifact_id: "bayesnet-7a310eef214d",
    kind: "bayesnet",
    format_version: "1",
    created_at: "2026-08-14T10:00:05+00:00",
    schema_fingerprint: "11b2c3d4e5f60718",
    training_metrics: { score: -645.8170784016681 },
    input_schema: {
      fields: [
        {
          name: "a",
          kind: "categorical",
          categories: ["x", "y"],
          required: false,
        },
      ],
      target: "b",
    },
  },
];

export const defaultPredictions: Record<string, PredictResponse> = {
  "svm-2c3f5b8a91d0": {
    artifact_id: "svm-2c3f5b8a91d0",
    prediction: {
      kind: "svm",
      label: "u",
      positive: false,
      decision_value: -0.9999550721577638,
    },
  },
  "bayesnet-7a310eef214d": {
    artifact_id: "bayesnet-7a310eef214d",
    prediction: {
      kind: "bayesnet",
      target: "b",
      distribution: { u: 0.9435483870967742, v: 0.05645161290322581 },
    },
  },
};

// --- scripted jobs --------------------------------------------------------------

interface ScriptedJob {
  kind: string;
  /** Status to report on the n-th poll; the last entry repeats. */
  script: JobStatus[];
  polls: number;
  result?: unknown;
  error?: JobError;
}

export interface StubOptions {
  upload?: UploadResponse;
  summary?: DatasetSummary;
  cohort?: CohortResponse;
  emptyCriteriaCohort?: CohortResponse;
  /** Columns that reject compare predicates with an inline criterion error. */
  categoricalColumns?: string[];
  bayesnetResult?: BayesnetResult;
  bayesnetError?: JobError;
  svmResult?: SvmGridJobResult;
  /** Status sequence for every new job (default queued, running, done). */
  jobScript?: JobStatus[];
  models?: ModelDetail[];
  predictions?: Record<string, PredictResponse>;
}

interface CohortBody {
  dataset_id: string;
  criteria: CriterionSpec[];
  analysis_vars: string[];
}

export class StubServer {
  readonly options: Required<
    Omit<StubOptions, "bayesnetError"> // error is genuinely optional
  > & { bayesnetError?: JobError };
  readonly requests: { method: string; path: string }[] = [];
  private server: Server | null = null;
  private jobs = new Map<string, ScriptedJob>();
  private jobCounter = 0;
  baseUrl = "";

  constructor(options: StubOptions = {}) {
    this.options = {
      upload: options.upload ?? defaultUpload,
      summary: options.summary ?? defaultSummary,
      cohort: options.cohort ?? defaultCohort,
      emptyCriteriaCohort:
        options.emptyCriteriaCohort ?? completeCaseOnlyCohort,
      categoricalColumns: options.categoricalColumns ?? ["a", "b", "prior_flag"],
      bayesnetResult: options.bayesnetResult ?? defaultBayesnetResult,
      svmResult: options.svmResult ?? defaultSvmResult,
      jobScript: options.jobScript ?? ["queued", "running", "done"],
      models: options.models ?? defaultModels,
      predictions: options.predictions ?? defaultPredictions,
      ...(options.bayesnetError !== undefined
        ? { bayesnetError: options.bayesnetError }
        : {}),
    };
  }

  async start(): Promise<string> {
    this.server = createServer((req, res) => {
      const chunks: Buffer[] = [];
      req.on("data", (chunk: Buffer) => chunks.push(chunk));
      req.on("end", () => {
        const raw = Buffer.concat(chunks).toString("utf8");
        const body = raw.length > 0 ? JSON.parse(raw) : null;
        this.route(req.method ?? "GET", req.url ?? "/", body, (status, payload) => {
          res.writeHead(status, { "content-type": "application/json" });
          res.end(JSON.stringify(payload));
        });
      });
    });
    await new Promise<void>((resolve) =>
      this.server!.listen(0, "127.0.0.1", resolve),
    );
    const address = this.server.address() as AddressInfo;
    this.baseUrl = `http://127.0.0.1:${address.port}`;
    return this.baseUrl;
  }

  async stop(): Promise<void> {
    if (this.server) {
      await new Promise<void>((resolve, reject) =>
        this.server!.close((err) => (err ? reject(err) : resolve())),
      );
      this.server = null;
    }
  }

  private newJob(kind: string, result?: unknown, error?: JobError): string {
    this.jobCounter += 1;
    const jobId = `job-${String(this.jobCounter).padStart(4, "0")}`;
    const script: JobStatus[] = error
      ? this.options.jobScript.map((s) => (s === "done" ? "failed" : s))
      : [...this.options.jobScript];
    const job: ScriptedJob = { kind, script, polls: 0 };
    if (result !== undefined) job.result = result;
    if (error !== undefined) job.error = error;
    this.jobs.set(jobId, job);
    return jobId;
  }

  private route(
    method: string,
    path: string,
    body: unknown,
    send: (status: number, payload: unknown) => void,
  ): void {
    this.requests.push({ method, path });
    const fail = (status: number, detail: ErrorDetail | string) =>
      send(status, { detail });

    if (method === "POST" && path === "/datasets") {
      send(201, this.options.upload);
      return;
    }

    const summaryMatch = path.match(/^\/datasets\/([^/]+)\/summary$/);
    if (method === "GET" && summaryMatch) {
      if (summaryMatch[1] !== this.options.summary.dataset_id) {
        fail(404, `no dataset ${summaryMatch[1]}`);
        return;
      }
      send(200, this.options.summary);
      return;
    }

    if (method === "POST" && path === "/cohorts") {
      const { criteria } = body as CohortBody;
      for (const criterion of criteria) {
        if (
          criterion.predicate.type === "compare" &&
          this.options.categoricalColumns.includes(criterion.column)
        ) {
          fail(422, {
            error: "CriterionError",
            message: `criterion '${criterion.label}': compare needs a continuous column`,
          });
          return;
        }
      }
      send(
        201,
        criteria.length === 0
          ? this.options.emptyCriteriaCohort
          : this.options.cohort,
      );
      return;
    }

    if (method === "POST" && path === "/analyses/bayesnet") {
      const jobId = this.options.bayesnetError
        ? this.newJob("bayesnet", undefined, this.options.bayesnetError)
        : this.newJob("bayesnet", this.options.bayesnetResult);
      send(202, { job_id: jobId });
      return;
    }

    if (method === "POST" && path === "/analyses/svm-grid") {
      send(202, { job_id: this.newJob("svm-grid", this.options.svmResult) });
      return;
    }

    const jobMatch = path.match(/^\/jobs\/([^/]+)$/);
    if (method === "GET" && jobMatch) {
      const job = this.jobs.get(jobMatch[1]!);
      if (!job) {
        fail(404, `no job ${jobMatch[1]}`);
        return;
      }
      const step = Math.min(job.polls, job.script.length - 1);
      job.polls += 1;
      const status = job.script[step]!;
      const snapshot: Record<string, unknown> = {
        job_id: jobMatch[1],
        kind: job.kind,
        status,
      };
      if (status === "done") snapshot.result = job.result;
      if (status === "failed") snapshot.error = job.error;
      send(200, snapshot);
      return;
    }

    if (method === "GET" && path === "/models") {
      send(200, {
        models: this.options.models.map(
          ({ input_schema: _schema, ...summary }) => summary,
        ),
      });
      return;
    }

    const modelMatch = path.match(/^\/models\/([^/]+)$/);
    if (method === "GET" && modelMatch) {
      const model = this.options.models.find(
        (m) => m.artifact_id === modelMatch[1],
      );
      if (!model) {
        fail(404, `no artifact ${modelMatch[1]}`);
        return;
      }
      send(200, model);
      return;
    }

    const predictMatch = path.match(/^\/models\/([^/]+)\/predict$/);
    if (method === "POST" && predictMatch) {
      const model = this.options.models.find(
        (m) => m.artifact_id === predictMatch[1],
      );
      const canned = this.options.predictions[predictMatch[1]!];
      if (!model || !canned) {
        fail(404, `no artifact ${predictMatch[1]}`);
        return;
      }
      const { record } = body as { record: Record<string, unknown> };
      for (const field of model.input_schema.fields) {
        if (field.required && !(field.name in record)) {
          fail(422, {
            error: "MissingVariable",
            message: `variable '${field.name}' is missing or unknown`,
            variable: field.name,
          });
          return;
        }
      }
      send(200, canned);
      return;
    }

    fail(404, `no route ${method} ${path}`);
  }
}
