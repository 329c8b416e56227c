/** Client plumbing: error surfacing, poll backoff, stale-response discard. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiError, WorkbenchClient, backoffDelay } from "../src/client.js";
import { WorkbenchState } from "../src/state.js";
import type { BayesnetResult, JobStatus } from "../src/types.js";
import { StubServer, defaultBayesnetResult } from "./stub.js";

describe("request plumbing", () => {
  const server = new StubServer();
  let client: WorkbenchClient;

  beforeAll(async () => {
    client = new WorkbenchClient(await server.start());
  });
  afterAll(() => server.stop());

  it("returns parsed bodies for happy-path calls", async () => {
    const upload = await client.uploadDataset({
      csv: "a,b\n",
      schema: { columns: [] },
    });
    expect(upload.dataset_id).toBe("ds-0001");
    expect(upload.n_rows).toBe(400);

    const summary = await client.datasetSummary(upload.dataset_id);
    expect(summary.columns.a?.kind).toBe("categorical");
  });

  it("raises ApiError with the HTTP status for unknown ids", async () => {
    const err = await client
      .datasetSummary("ds-9999")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
  });

  it("raises ApiError carrying the structured 422 detail", async () => {
    const err = await client
      .buildCohort({
        dataset_id: "ds-0001",
        criteria: [
          {
            label: "numeric a",
            column: "a",
            kind: "exclusion",
            predicate: { type: "compare", op: "<", threshold: 3 },
          },
        ],
        analysis_vars: ["a"],
      })
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.detail?.error).toBe("CriterionError");
    expect(apiErr.message).toContain("continuous column");
  });
});

describe("job polling", () => {
  it("polls through queued and running to the result", async () => {
    const server = new StubServer();
    const client = new WorkbenchClient(await server.start());
    const delays: number[] = [];
    try {
      const { job_id } = await client.startBayesnet({
        cohort_id: "co-0001",
        variables: ["a", "b", "c"],
      });
      const snapshot = await client.pollJob<BayesnetResult>(job_id, {
        sleep: async (ms) => {
          delays.push(ms);
        },
      });
      expect(snapshot.status).toBe("done");
      expect(snapshot.result).toEqual(defaultBayesnetResult);
      // One sleep after each unsettled poll (queued, running), doubling.
      expect(delays).toEqual([100, 200]);
    } finally {
      await server.stop();
    }
  });

  it("caps the doubling delay at two seconds", async () => {
    const script: JobStatus[] = [...Array<JobStatus>(7).fill("queued"), "done"];
    const server = new StubServer({ jobScript: script });
    const client = new WorkbenchClient(await server.start());
    const delays: number[] = [];
    try {
      const { job_id } = await client.startSvmGrid({
        cohort_id: "co-0001",
        feature_vars: ["a"],
        label_var: "b",
        positive_label: "v",
      });
      await client.pollJob(job_id, {
        sleep: async (ms) => {
          delays.push(ms);
        },
      });
      expect(delays).toEqual([100, 200, 400, 800, 1600, 2000, 2000]);
      expect(Math.max(...delays)).toBeLessThanOrEqual(2000);
    } finally {
      await server.stop();
    }
  });

  it("settles on failed jobs instead of spinning", async () => {
    const server = new StubServer({
      bayesnetError: { error: "SearchConfigError", message: "too few variables" },
    });
    const client = new WorkbenchClient(await server.start());
    try {
      const { job_id } = await client.startBayesnet({
        cohort_id: "co-0001",
        variables: ["a"],
      });
      const snapshot = await client.pollJob(job_id, { sleep: async () => {} });
      expect(snapshot.status).toBe("failed");
      expect(snapshot.error?.error).toBe("SearchConfigError");
      expect(snapshot).not.toHaveProperty("result");
    } finally {
      await server.stop();
    }
  });

  it("404s on unknown job ids", async () => {
    const server = new StubServer();
    const client = new WorkbenchClient(await server.start());
    try {
      const err = await client
        .getJob("job-9999")
        .then(() => null)
        .catch((e: unknown) => e);
      expect((err as ApiError).status).toBe(404);
    } finally {
      await server.stop();
    }
  });

  it("computes the backoff sequence 100, 200, … capped at 2000", () => {
    const sequence = [0, 1, 2, 3, 4, 5, 6, 10].map((n) => backoffDelay(n));
    expect(sequence).toEqual([100, 200, 400, 800, 1600, 2000, 2000, 2000]);
  });
});

describe("stale job snapshots", () => {
  it("discards a snapshot for a superseded job id", () => {
    const state = new WorkbenchState();
    state.trackJob("bayesnet", "job-0001");
    // The user restarts the analysis while a poll is in flight …
    state.trackJob("bayesnet", "job-0002");

    const applied = state.applyJobSnapshot("bayesnet", {
      job_id: "job-0001",
      kind: "bayesnet",
      status: "done",
      result: defaultBayesnetResult,
    });
    expect(applied).toBe(false);
    // … so the late job-0001 result never reaches the screen.
    expect(state.bayesnet.jobId).toBe("job-0002");
    expect(state.bayesnet.status).toBe("queued");
    expect(state.bayesnet.result).toBeNull();
  });

  it("applies snapshots for the tracked id, including failures", () => {
    const state = new WorkbenchState();
    state.trackJob("svm-grid", "job-0003");
    expect(
      state.applyJobSnapshot("svm-grid", {
        job_id: "job-0003",
        kind: "svm-grid",
        status: "running",
      }),
    ).toBe(true);
    expect(state.svmGrid.status).toBe("running");

    expect(
      state.applyJobSnapshot("svm-grid", {
        job_id: "job-0003",
        kind: "svm-grid",
        status: "failed",
        error: { error: "LabelError", message: "label must be categorical" },
      }),
    ).toBe(true);
    expect(state.svmGrid.status).toBe("failed");
    expect(state.svmGrid.error?.error).toBe("LabelError");
    expect(state.svmGrid.result).toBeNull();
  });

  it("keeps the two analysis kinds independent", () => {
    const state = new WorkbenchState();
    state.trackJob("bayesnet", "job-0001");
    state.trackJob("svm-grid", "job-0002");
    state.applyJobSnapshot("bayesnet", {
      job_id: "job-0001",
      kind: "bayesnet",
      status: "done",
      result: defaultBayesnetResult,
    });
    expect(state.bayesnet.status).toBe("done");
    expect(state.svmGrid.status).toBe("queued");
  });
});
