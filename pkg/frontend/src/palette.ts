/** Categorical cluster hues (black reserved for unassigned -1) and the
 * sequential scale for feature values. */

import { interpolateViridis } from "d3";

const CATEGORICAL = [
  "#1f77b4", "#ff7f0e", "#d62728", "#2ca02c", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export const UNASSIGNED_COLOR = "#000000";
export const ABOVE_MEAN_COLOR = "#c62828"; // red: feature value >= mean
export const BELOW_MEAN_COLOR = "#2e7d32"; // green: feature value < mean

export function clusterColor(label: number): string {
  if (label < 0) {
    return UNASSIGNED_COLOR;
  }
  return CATEGORICAL[label % CATEGORICAL.length];
}

export function featureValueColor(value: number, lo: number, hi: number): string {
  const t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
  return interpolateViridis(t);
}
