/** Tuning-grid heatmap render model.
 *
 * Rows are gamma values and columns are cost values, both in the order the
 * service first reported them.  Cell shading scales with the service's
 * Youden index; which cell counts as "best" is read from the result's
 * `best_index`, never recomputed from the metrics.
 */

import type { ConfusionCounts, GridCell, GridResult } from "../types.js";

export interface HeatmapCell {
  index: number;
  row: number;
  col: number;
  gamma: number;
  cost: number;
  youden: number | null;
  /** 0..1 shade, linear between the grid's lowest and highest Youden. */
  intensity: number | null;
  best: boolean;
  unavailable: boolean;
}

export interface HeatmapModel {
  gammas: number[];
  costs: number[];
  cells: HeatmapCell[];
  bestIndex: number;
}

function firstSeen(values: number[]): number[] {
  const seen: number[] = [];
  for (const v of values) {
    if (!seen.includes(v)) {
      seen.push(v);
    }
  }
  return seen;
}

export function renderHeatmap(grid: GridResult): HeatmapModel {
  const gammas = firstSeen(grid.cells.map((c) => c.gamma));
  const costs = firstSeen(grid.cells.map((c) => c.cost));
  const youdens = grid.cells
    .map((c) => c.youden)
    .filter((y): y is number => y !== null);
  const lo = youdens.length > 0 ? Math.min(...youdens) : 0;
  const hi = youdens.length > 0 ? Math.max(...youdens) : 0;
  const span = hi - lo;

  const cells = grid.cells.map((cell, index) => ({
    index,
    row: gammas.indexOf(cell.gamma),
    col: costs.indexOf(cell.cost),
    gamma: cell.gamma,
    cost: cell.cost,
    youden: cell.youden,
    intensity:
      cell.youden === null ? null : span === 0 ? 1 : (cell.youden - lo) / span,
    best: index === grid.best_index,
    unavailable: cell.error !== null,
  }));
  return { gammas, costs, cells, bestIndex: grid.best_index };
}

export interface CellMetricsPanel {
  kind: "metrics";
  gamma: number;
  cost: number;
  confusion: ConfusionCounts;
  /** Ratio fields exactly as returned … */
  sensitivity: number;
  specificity: number;
  youden: number;
  /** … and their one-decimal percent renderings for display. */
  sensitivityPct: string;
  specificityPct: string;
}

export interface CellUnavailablePanel {
  kind: "unavailable";
  gamma: number;
  cost: number;
  error: string;
}

export type CellPanel = CellMetricsPanel | CellUnavailablePanel;

export function formatPercent(ratio: number): string {
  return `${(ratio * 100).toFixed(1)}%`;
}

/** Details panel for a clicked cell: config, confusion matrix, metrics. */
export function renderCellPanel(cell: GridCell): CellPanel {
  if (
    cell.error !== null ||
    cell.confusion === null ||
    cell.sensitivity === null ||
    cell.specificity === null ||
    cell.youden === null
  ) {
    return {
      kind: "unavailable",
      gamma: cell.gamma,
      cost: cell.cost,
      error: cell.error ?? "metrics unavailable",
    };
  }
  return {
    kind: "metrics",
    gamma: cell.gamma,
    cost: cell.cost,
    confusion: cell.confusion,
    sensitivity: cell.sensitivity,
    specificity: cell.specificity,
    youden: cell.youden,
    sensitivityPct: formatPercent(cell.sensitivity),
    specificityPct: formatPercent(cell.specificity),
  };
}
