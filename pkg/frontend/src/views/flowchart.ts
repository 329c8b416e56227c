/** Cohort flowchart render model.
 *
 * The service already did the counting; this module lays its numbers out
 * as a vertical exclusion diagram.  No count on screen is computed here —
 * each one is copied from a field of the cohort response.
 */

import type { Flowchart } from "../types.js";

export interface FlowchartBox {
  /** What the box shows: a remaining-count node or an exclusion branch. */
  kind: "count" | "exclusion";
  label: string;
  n: number;
}

export interface FlowchartModel {
  initial: number;
  final: number;
  boxes: FlowchartBox[];
}

export function renderFlowchart(flowchart: Flowchart): FlowchartModel {
  const boxes: FlowchartBox[] = [
    { kind: "count", label: "assessed", n: flowchart.initial_n },
  ];
  for (const step of flowchart.steps) {
    boxes.push({ kind: "exclusion", label: step.label, n: step.n_excluded });
    boxes.push({ kind: "count", label: "remaining", n: step.n_after });
  }
  const last = boxes[boxes.length - 1];
  if (last !== undefined && last.kind === "count") {
    last.label = "included";
  }
  return { initial: flowchart.initial_n, final: flowchart.final_n, boxes };
}

/** Terminal-style rendering, one box per line. */
export function flowchartText(model: FlowchartModel): string[] {
  return model.boxes.map((box) =>
    box.kind === "count"
      ? `${box.n}  ${box.label}`
      : ` |-- ${box.n} excluded: ${box.label}`,
  );
}
