/** Importance Heatmap: sum |shapley| per (cluster, feature), drawn exactly
 * in the row/col orders served by the artifact, with a feature legend. */

import { select } from "d3";

import { clusterColor } from "./palette";
import type { ImportanceHeatmap } from "./types";

const CELL = 44;
const LEFT = 86;
const TOP = 8;

export function renderHeatmap(container: HTMLElement, hm: ImportanceHeatmap): void {
  const root = select(container);
  root.selectAll("*").remove();
  const rows = hm.row_order;
  const cols = hm.col_order;
  const maxCell = Math.max(...hm.cells.flat(), 1e-12);

  const svg = root
    .append("svg")
    .attr("class", "importance-heatmap")
    .attr("data-row-order", rows.join(","))
    .attr("data-col-order", cols.join(","))
    .attr("width", LEFT + cols.length * CELL + 12)
    .attr("height", TOP + rows.length * CELL + 26);

  rows.forEach((r, ri) => {
    const g = svg
      .append("g")
      .attr("class", "heatmap-row")
      .attr("data-cluster", hm.cluster_ids[r])
      .attr("transform", `translate(0, ${TOP + ri * CELL})`);
    g.append("circle")
      .attr("cx", 16)
      .attr("cy", CELL / 2)
      .attr("r", 7)
      .attr("fill", clusterColor(hm.cluster_ids[r]));
    g.append("text")
      .attr("x", 30)
      .attr("y", CELL / 2 + 4)
      .text(String(hm.cluster_ids[r]));
    cols.forEach((c, ci) => {
      const value = hm.cells[r][c];
      g.append("rect")
        .attr("class", "heatmap-cell")
        .attr("data-row", r)
        .attr("data-col", c)
        .attr("data-value", value)
        .attr("x", LEFT + ci * CELL)
        .attr("width", CELL - 3)
        .attr("height", CELL - 3)
        .attr("fill", "#00695c")
        .attr("fill-opacity", value / maxCell)
        .append("title")
        .text(`${hm.features[c]} / cluster ${hm.cluster_ids[r]}: ${value.toPrecision(5)}`);
    });
  });

  // feature legend in display order
  const legend = svg
    .append("g")
    .attr("class", "heatmap-legend")
    .attr("transform", `translate(${LEFT}, ${TOP + rows.length * CELL + 14})`);
  cols.forEach((c, ci) => {
    legend
      .append("text")
      .attr("class", "legend-feature")
      .attr("data-feature", hm.features[c])
      .attr("data-col", c)
      .attr("x", ci * CELL + CELL / 2)
      .attr("text-anchor", "middle")
      .attr("font-size", 9)
      .text(String(ci + 1));
  });
  const list = root.append("ol").attr("class", "heatmap-feature-list");
  cols.forEach((c) => {
    list.append("li").attr("data-feature-index", hm.feature_indices[c]).text(hm.features[c]);
  });
}
