/** Hover tooltip: one interleaved-histogram row per top feature, features
 * already ordered by importance in the artifact. Red slots carry the
 * above-mean histogram, green the below-mean one; a vertical marker shows
 * shapley = 0. Every displayed number comes straight from the artifact. */

import { select } from "d3";

import { ABOVE_MEAN_COLOR, BELOW_MEAN_COLOR } from "./palette";
import type { ClusterSummary } from "./types";

const ROW_H = 26;
const LABEL_W = 150;
const PLOT_W = 320;

export function renderTooltip(container: HTMLElement, summary: ClusterSummary): void {
  const root = select(container);
  root.selectAll("*").remove();
  const hists = summary.histograms;
  const width = LABEL_W + PLOT_W + 10;
  const height = hists.length * ROW_H + 18;
  const svg = root
    .append("svg")
    .attr("class", "tooltip-histograms")
    .attr("data-cluster", summary.cluster_id)
    .attr("width", width)
    .attr("height", height);

  hists.forEach((hist, row) => {
    const g = svg
      .append("g")
      .attr("class", "tooltip-feature")
      .attr("data-feature", hist.feature)
      .attr("data-feature-index", hist.feature_index)
      .attr("data-rank", row)
      .attr("transform", `translate(0, ${row * ROW_H})`);
    g.append("text")
      .attr("class", "feature-label")
      .attr("x", LABEL_W - 6)
      .attr("y", ROW_H / 2 + 4)
      .attr("text-anchor", "end")
      .text(hist.feature);

    const slots = hist.bins;
    const slotW = PLOT_W / slots.length;
    slots.forEach((slot, i) => {
      const wide = slot.wide ? 2 : 1;
      g.append("rect")
        .attr("class", `slot ${slot.side}`)
        .attr("data-side", slot.side)
        .attr("data-count", slot.count)
        .attr("data-density", slot.density)
        .attr("x", LABEL_W + i * slotW)
        .attr("y", 3)
        .attr("width", slotW * wide)
        .attr("height", ROW_H - 6)
        .attr("fill", slot.side === "above_mean" ? ABOVE_MEAN_COLOR : BELOW_MEAN_COLOR)
        .attr("fill-opacity", slot.density);
    });
  });

  // zero marker across all rows
  const first = hists[0];
  if (first && first.shapley_max > first.shapley_min) {
    const t = (0 - first.shapley_min) / (first.shapley_max - first.shapley_min);
    if (t >= 0 && t <= 1) {
      svg
        .append("line")
        .attr("class", "zero-marker")
        .attr("x1", LABEL_W + t * PLOT_W)
        .attr("x2", LABEL_W + t * PLOT_W)
        .attr("y1", 0)
        .attr("y2", hists.length * ROW_H)
        .attr("stroke", "#333")
        .attr("stroke-dasharray", "3 2");
    }
  }
}
