/** Cohort builder: the flowchart is a verbatim copy of the service's counts. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { WorkbenchClient } from "../src/client.js";
import { WorkbenchState, submitCriteria } from "../src/state.js";
import { flowchartText, renderFlowchart } from "../src/views/flowchart.js";
import type { CriterionSpec } from "../src/types.js";
import { StubServer, defaultCohort } from "./stub.js";

const priorRecord: CriterionSpec = {
  label: "prior record",
  column: "prior_flag",
  kind: "exclusion",
  predicate: { type: "equals", value: "yes" },
};

describe("cohort flowchart", () => {
  const server = new StubServer();
  let client: WorkbenchClient;

  beforeAll(async () => {
    client = new WorkbenchClient(await server.start());
  });
  afterAll(() => server.stop());

  async function freshState(): Promise<WorkbenchState> {
    const state = new WorkbenchState();
    const upload = await client.uploadDataset({
      csv: "a,b,c,prior_flag\n",
      schema: { columns: [] },
    });
    const summary = await client.datasetSummary(upload.dataset_id);
    state.setDataset(upload.dataset_id, summary);
    return state;
  }

  it("renders exactly the step counts the service returned", async () => {
    const state = await freshState();
    state.addCriterion(priorRecord);
    const ok = await submitCriteria(client, state, ["a", "b", "c"]);
    expect(ok).toBe(true);

    const flowchart = state.flowchart!;
    const model = renderFlowchart(flowchart);
    expect(model.initial).toBe(flowchart.initial_n);
    expect(model.final).toBe(flowchart.final_n);

    // Box by box against the wire payload: assessed count, then each
    // exclusion branch and remaining count, ending at the included count.
    const [assessed, branch1, remain1, branch2, remain2] = model.boxes;
    expect(assessed).toEqual({ kind: "count", label: "assessed", n: 400 });
    expect(branch1).toEqual({
      kind: "exclusion",
      label: "prior record",
      n: flowchart.steps[0]!.n_excluded,
    });
    expect(remain1).toEqual({
      kind: "count",
      label: "remaining",
      n: flowchart.steps[0]!.n_after,
    });
    expect(branch2).toEqual({
      kind: "exclusion",
      label: "incomplete data",
      n: flowchart.steps[1]!.n_excluded,
    });
    expect(remain2).toEqual({
      kind: "count",
      label: "included",
      n: flowchart.steps[1]!.n_after,
    });

    expect(flowchartText(model)).toEqual([
      "400  assessed",
      " |-- 30 excluded: prior record",
      "370  remaining",
      " |-- 20 excluded: incomplete data",
      "350  included",
    ]);
  });

  it("shows only the complete-case step when all criteria are removed", async () => {
    const state = await freshState();
    state.addCriterion(priorRecord);
    await submitCriteria(client, state, ["a", "b", "c"]);
    state.clearCriteria();
    const ok = await submitCriteria(client, state, ["a", "b", "c"]);
    expect(ok).toBe(true);

    const model = renderFlowchart(state.flowchart!);
    expect(model.boxes.filter((b) => b.kind === "exclusion")).toHaveLength(1);
    expect(model.boxes[1]!.label).toBe("incomplete data");
    expect(model.boxes[1]!.n).toBe(20);
    expect(model.final).toBe(380);
  });

  it("pins a type-incompatible criterion error inline and keeps the flowchart", async () => {
    const state = await freshState();
    state.addCriterion(priorRecord);
    await submitCriteria(client, state, ["a", "b", "c"]);
    const before = state.flowchart;

    state.addCriterion({
      label: "a at least two",
      column: "a", // categorical on the service side
      kind: "exclusion",
      predicate: { type: "compare", op: ">=", threshold: 2 },
    });
    const ok = await submitCriteria(client, state, ["a", "b", "c"]);
    expect(ok).toBe(false);

    expect(state.criteria[0]!.error).toBeNull();
    expect(state.criteria[1]!.error).toContain(
      "compare needs a continuous column",
    );
    // The previous flowchart is still what the view renders.
    expect(state.flowchart).toBe(before);
    expect(state.flowchart).toEqual(defaultCohort.flowchart);
  });

  it("clears the inline error once the criterion is edited", async () => {
    const state = await freshState();
    state.addCriterion({
      label: "bad",
      column: "a",
      kind: "exclusion",
      predicate: { type: "compare", op: "<", threshold: 1 },
    });
    await submitCriteria(client, state, ["a"]);
    expect(state.criteria[0]!.error).not.toBeNull();

    state.updateCriterion(0, {
      label: "bad",
      column: "a",
      kind: "exclusion",
      predicate: { type: "equals", value: "x" },
    });
    expect(state.criteria[0]!.error).toBeNull();
  });
});
