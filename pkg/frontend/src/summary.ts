/** Importance Summary grid: per cluster, the top features' mean |shapley|
 * as color intensity and each feature's contribution share as bar height.
 * Rendered values are copied verbatim into data attributes. */

import { select } from "d3";

import { clusterColor, featureValueColor } from "./palette";
import type { ImportanceSummary } from "./types";

const CELL_W = 68;
const CELL_H = 54;
const BAR_MAX = 36;

export function renderSummary(container: HTMLElement, summary: ImportanceSummary): void {
  const root = select(container);
  root.selectAll("*").remove();
  const maxIntensity = Math.max(
    ...summary.clusters.flatMap((c) => c.features.map((f) => f.mean_abs_shapley)),
    1e-12,
  );
  const cols = Math.max(...summary.clusters.map((c) => c.features.length));
  const svg = root
    .append("svg")
    .attr("class", "importance-summary")
    .attr("width", 90 + cols * CELL_W)
    .attr("height", summary.clusters.length * CELL_H + 10);

  summary.clusters.forEach((cluster, r) => {
    const g = svg
      .append("g")
      .attr("class", "summary-cluster")
      .attr("data-cluster", cluster.cluster_id)
      .attr("transform", `translate(0, ${r * CELL_H})`);
    g.append("circle")
      .attr("cx", 14)
      .attr("cy", CELL_H / 2)
      .attr("r", 7)
      .attr("fill", clusterColor(cluster.cluster_id));
    g.append("text")
      .attr("x", 28)
      .attr("y", CELL_H / 2 + 4)
      .text(`cluster ${cluster.cluster_id}`);

    cluster.features.forEach((feat, c) => {
      const cell = g
        .append("g")
        .attr("class", "summary-cell")
        .attr("data-feature", feat.feature)
        .attr("data-feature-index", feat.feature_index)
        .attr("data-rank", c)
        .attr("data-intensity", feat.mean_abs_shapley)
        .attr("data-share", feat.share)
        .attr("transform", `translate(${90 + c * CELL_W}, 0)`);
      cell
        .append("rect")
        .attr("class", "intensity")
        .attr("width", CELL_W - 6)
        .attr("height", CELL_H - 8)
        .attr("fill", "#3f51b5")
        .attr("fill-opacity", feat.mean_abs_shapley / maxIntensity);
      cell
        .append("rect")
        .attr("class", "share-bar")
        .attr("x", (CELL_W - 6) / 2 - 5)
        .attr("y", CELL_H - 8 - feat.share * BAR_MAX)
        .attr("width", 10)
        .attr("height", feat.share * BAR_MAX)
        .attr("fill", featureValueColor(feat.feature_index, 0, Math.max(cols * 2, 8)));
      cell
        .append("title")
        .text(`${feat.feature}: mean |shapley| ${feat.mean_abs_shapley.toPrecision(4)}, share ${(feat.share * 100).toFixed(1)}%`);
    });
  });
}
