/** Network view: layered DAG drawing plus cause highlighting.
 *
 * Layout is longest-path layering (each node sits one layer below its
 * deepest parent) with barycenter ordering inside each layer, ties broken
 * by node name so the drawing is deterministic.  Highlight sets are copied
 * from the analysis result's causal report — the view never walks the
 * graph to find ancestors itself.
 */

import type { BayesnetResult, JobError, JobStatus } from "../types.js";

export interface DagLayout {
  /** Node names per layer, top to bottom, in final drawing order. */
  layers: string[][];
  edges: [string, string][];
}

export type Highlight = "target" | "direct" | "indirect";

export interface DagHighlights {
  byNode: Record<string, Highlight>;
  /** Set when the selection could not be highlighted; layout is unchanged. */
  notice: string | null;
}

export function layoutDag(
  nodes: string[],
  edges: [string, string][],
): DagLayout {
  const parents = new Map<string, string[]>(nodes.map((n) => [n, []]));
  const children = new Map<string, string[]>(nodes.map((n) => [n, []]));
  for (const [from, to] of edges) {
    if (!parents.has(from) || !parents.has(to)) {
      throw new Error(`edge ${from}->${to} references an unknown node`);
    }
    parents.get(to)!.push(from);
    children.get(from)!.push(to);
  }

  // Longest path from a root, via Kahn's algorithm over a sorted frontier.
  const layerOf = new Map<string, number>();
  const pending = new Map(nodes.map((n) => [n, parents.get(n)!.length]));
  let frontier = nodes.filter((n) => pending.get(n) === 0).sort();
  for (const root of frontier) {
    layerOf.set(root, 0);
  }
  while (frontier.length > 0) {
    const next: string[] = [];
    for (const node of frontier) {
      for (const child of children.get(node)!) {
        layerOf.set(
          child,
          Math.max(layerOf.get(child) ?? 0, layerOf.get(node)! + 1),
        );
        const left = pending.get(child)! - 1;
        pending.set(child, left);
        if (left === 0) {
          next.push(child);
        }
      }
    }
    frontier = next.sort();
  }
  if (layerOf.size !== nodes.length) {
    throw new Error("graph contains a cycle");
  }

  const depth = nodes.length === 0 ? 0 : Math.max(...layerOf.values()) + 1;
  const layers: string[][] = Array.from({ length: depth }, () => []);
  for (const node of nodes) {
    layers[layerOf.get(node)!]!.push(node);
  }

  // Barycenter sweep: order each layer by the mean position of its parents
  // in the rows above, falling back to the name for roots and ties.
  const position = new Map<string, number>();
  layers.forEach((layer, level) => {
    if (level === 0) {
      layer.sort();
    } else {
      const bary = new Map<string, number>();
      for (const node of layer) {
        const ps = parents.get(node)!;
        const mean =
          ps.length === 0
            ? Number.POSITIVE_INFINITY
            : ps.reduce((acc, p) => acc + position.get(p)!, 0) / ps.length;
        bary.set(node, mean);
      }
      layer.sort((a, b) => {
        const diff = bary.get(a)! - bary.get(b)!;
        return diff !== 0 ? diff : a < b ? -1 : 1;
      });
    }
    layer.forEach((node, index) => position.set(node, index));
  });

  return { layers, edges: edges.map(([a, b]) => [a, b]) };
}

/** Highlight sets for a selected target, straight from the causal report.
 *
 * A selection the result does not cover (name not in the graph, or the
 * report was computed for a different target) leaves every node unhighlighted
 * and explains why in `notice`.
 */
export function highlightForTarget(
  result: BayesnetResult,
  target: string | null,
): DagHighlights {
  if (target === null) {
    return { byNode: {}, notice: null };
  }
  if (!result.nodes.includes(target)) {
    return { byNode: {}, notice: `no variable named '${target}' in this network` };
  }
  const causal = result.causal;
  if (!causal || causal.target !== target) {
    return {
      byNode: {},
      notice: `no cause report for '${target}' in this result; rerun the analysis with it as target`,
    };
  }
  const byNode: Record<string, Highlight> = { [target]: "target" };
  for (const name of causal.direct) {
    byNode[name] = "direct";
  }
  for (const name of causal.indirect) {
    byNode[name] = "indirect";
  }
  return { byNode, notice: null };
}

export type DagPanel =
  | { kind: "empty" }
  | { kind: "pending"; status: JobStatus }
  | { kind: "error"; error: string; message: string }
  | { kind: "dag"; layout: DagLayout; highlights: DagHighlights };

/** Everything the network pane shows, for one job tracker snapshot. */
export function renderDagPanel(
  view: {
    status: JobStatus | null;
    result: BayesnetResult | null;
    error: JobError | null;
  },
  target: string | null,
): DagPanel {
  if (view.status === "failed") {
    const error = view.error ?? { error: "JobFailed", message: "job failed" };
    return { kind: "error", error: error.error, message: error.message };
  }
  if (view.status === "queued" || view.status === "running") {
    return { kind: "pending", status: view.status };
  }
  if (view.result === null) {
    return { kind: "empty" };
  }
  return {
    kind: "dag",
    layout: layoutDag(view.result.nodes, view.result.edges),
    highlights: highlightForTarget(view.result, target),
  };
}
