/** Detailed view for a clicked cluster: dot plots of the top features
 * (x = shapley value, color = feature value), a density strip under each,
 * and the aggregated-KDE panel beside. Brushing here highlights the same
 * rows in the scatter plot and vice versa. */

import { select, type Selection } from "d3";

import { ABOVE_MEAN_COLOR, BELOW_MEAN_COLOR, featureValueColor } from "./palette";
import type { ViewState } from "./state";
import type { ClusterSummary, DotPlotFeature } from "./types";

const ROW_H = 64;
const STRIP_H = 10;
const LABEL_W = 150;
const PLOT_W = 430;
const KDE_W = 240;
const KDE_BIN_H = 64;

export function renderDotPlot(
  container: HTMLElement,
  summary: ClusterSummary,
  state: ViewState,
  onBrush?: (rowIds: number[]) => void,
): void {
  const root = select(container);
  root.selectAll("*").remove();
  const dp = summary.dot_plot;
  const { shapley_min: lo, shapley_max: hi } = dp;
  const x = (v: number) => LABEL_W + (hi > lo ? ((v - lo) / (hi - lo)) * PLOT_W : PLOT_W / 2);

  const height = dp.features.length * ROW_H + 24;
  const svg = root
    .append("svg")
    .attr("class", "dot-plot")
    .attr("data-cluster", dp.cluster_id)
    .attr("width", LABEL_W + PLOT_W + 20)
    .attr("height", height);

  if (hi > lo && lo <= 0 && 0 <= hi) {
    svg
      .append("line")
      .attr("class", "zero-marker")
      .attr("x1", x(0))
      .attr("x2", x(0))
      .attr("y1", 0)
      .attr("y2", dp.features.length * ROW_H)
      .attr("stroke", "#333")
      .attr("stroke-dasharray", "3 2");
  }

  const brushed = state.brushedRowIds;
  dp.features.forEach((feat, row) => {
    const g = svg
      .append("g")
      .attr("class", "dot-feature")
      .attr("data-feature", feat.feature)
      .attr("data-feature-index", feat.feature_index)
      .attr("data-rank", row)
      .attr("transform", `translate(0, ${row * ROW_H})`);
    g.append("text")
      .attr("class", "feature-label")
      .attr("x", LABEL_W - 6)
      .attr("y", ROW_H / 2)
      .attr("text-anchor", "end")
      .text(feat.feature);

    const values = feat.points.map((p) => p.feature_value);
    const vLo = Math.min(...values);
    const vHi = Math.max(...values);
    feat.points.forEach((p) => {
      g.append("circle")
        .attr("class", "dot")
        .attr("data-row-id", p.row_id)
        .attr("data-shapley", p.shapley)
        .attr("cx", x(p.shapley))
        .attr("cy", ROW_H / 2 - 8 + jitter(p.row_id))
        .attr("r", brushed.has(p.row_id) ? 5 : 3)
        .attr("stroke", brushed.has(p.row_id) ? "#111" : "none")
        .attr("stroke-width", brushed.has(p.row_id) ? 1.5 : 0)
        .attr("fill", featureValueColor(p.feature_value, vLo, vHi))
        .on("click", () => onBrush?.([p.row_id]));
    });

    renderDensityStrip(g, feat, x);
  });

  renderKdePanel(root, summary);
}

function jitter(rowId: number): number {
  return ((rowId * 2654435761) % 17) - 8; // deterministic vertical spread
}

function renderDensityStrip(
  g: Selection<SVGGElement, unknown, null, undefined>,
  feat: DotPlotFeature,
  x: (v: number) => number,
): void {
  const { bin_edges: edges, counts } = feat.density;
  const maxCount = Math.max(...counts, 1);
  counts.forEach((count, i) => {
    g.append("rect")
      .attr("class", "density-bar")
      .attr("data-count", count)
      .attr("x", x(edges[i]))
      .attr("y", ROW_H - STRIP_H - 4)
      .attr("width", Math.max(x(edges[i + 1]) - x(edges[i]), 1))
      .attr("height", STRIP_H)
      .attr("fill", "#607d8b")
      .attr("fill-opacity", count / maxCount);
  });
}

function renderKdePanel(root: Selection<HTMLElement, unknown, null, undefined>, summary: ClusterSummary): void {
  const agg = summary.aggregated_kde;
  const svg = root
    .append("svg")
    .attr("class", "aggregated-kde")
    .attr("data-cluster", agg.cluster_id)
    .attr("width", KDE_W + 20)
    .attr("height", agg.bins.length * KDE_BIN_H + 20);

  const maxCount = Math.max(...agg.bins.map((b) => b.count), 1);
  agg.bins.forEach((bin, i) => {
    const g = svg
      .append("g")
      .attr("class", "kde-bin")
      .attr("data-count", bin.count)
      .attr("data-lo", bin.limits[0])
      .attr("data-hi", bin.limits[1])
      .attr("transform", `translate(0, ${i * KDE_BIN_H})`);
    g.append("text")
      .attr("class", "kde-label")
      .attr("x", 4)
      .attr("y", 12)
      .text(`[${bin.limits[0].toFixed(2)}, ${bin.limits[1].toFixed(2)}) n=${bin.count}`);
    g.append("rect")
      .attr("class", "kde-count-bar")
      .attr("x", 4)
      .attr("y", 16)
      .attr("width", (bin.count / maxCount) * (KDE_W - 8))
      .attr("height", 5)
      .attr("fill", "#90a4ae");

    for (const [curve, color] of [
      [bin.curve_above, ABOVE_MEAN_COLOR],
      [bin.curve_below, BELOW_MEAN_COLOR],
    ] as const) {
      if (!curve) {
        continue;
      }
      const peak = Math.max(...curve, 1e-12);
      const pts = curve
        .map((v, j) => {
          const px = 4 + (j / (curve.length - 1)) * (KDE_W - 8);
          const py = KDE_BIN_H - 6 - (v / peak) * (KDE_BIN_H - 30);
          return `${px.toFixed(1)},${py.toFixed(1)}`;
        })
        .join(" ");
      g.append("polyline")
        .attr("class", color === ABOVE_MEAN_COLOR ? "kde-curve-above" : "kde-curve-below")
        .attr("points", pts)
        .attr("fill", "none")
        .attr("stroke", color)
        .attr("stroke-width", 1.5);
    }
  });
}
