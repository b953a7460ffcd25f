/** Display fidelity against a fixed Iris artifact: rendered tooltip
 * ordering, heatmap orders/cells, and summary intensities must equal the
 * artifact fields exactly (the UI never recomputes shapley-derived data). */

import { beforeEach, describe, expect, it } from "vitest";

import { renderDotPlot } from "../src/dotplot";
import { renderHeatmap } from "../src/heatmap";
import { ViewState } from "../src/state";
import { renderSummary } from "../src/summary";
import { renderTooltip } from "../src/tooltip";
import type { Artifact } from "../src/types";
import rawArtifact from "./fixtures/iris_artifact.json";

const artifact = rawArtifact as unknown as Artifact;

function freshDiv(): HTMLElement {
  const div = document.createElement("div");
  document.body.appendChild(div);
  return div;
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("tooltip", () => {
  it("lists features exactly in the artifact's importance order", () => {
    for (const cluster of artifact.summaries.clusters) {
      const div = freshDiv();
      renderTooltip(div, cluster);
      const rendered = [...div.querySelectorAll(".tooltip-feature")].map(
        (node) => node.getAttribute("data-feature"),
      );
      const expected = cluster.histograms.map((h) => h.feature);
      expect(rendered).toEqual(expected);
    }
  });

  it("lists petal length first for iris cluster 0", () => {
    const div = freshDiv();
    renderTooltip(div, artifact.summaries.clusters[0]);
    expect(
      div.querySelector(".tooltip-feature")?.getAttribute("data-feature"),
    ).toBe("petal length (cm)");
  });

  it("renders every slot with the artifact's density and side, plus a zero marker", () => {
    const cluster = artifact.summaries.clusters[1];
    const div = freshDiv();
    renderTooltip(div, cluster);
    const rows = [...div.querySelectorAll(".tooltip-feature")];
    rows.forEach((row, r) => {
      const slots = [...row.querySelectorAll(".slot")];
      expect(slots.length).toBe(cluster.histograms[r].bins.length);
      slots.forEach((slot, i) => {
        const bin = cluster.histograms[r].bins[i];
        expect(Number(slot.getAttribute("data-density"))).toBe(bin.density);
        expect(slot.getAttribute("data-side")).toBe(bin.side);
      });
      const sides = slots.map((s) => s.getAttribute("data-side"));
      sides.forEach((side, i) => {
        expect(side).toBe(i % 2 === 0 ? "above_mean" : "below_mean");
      });
    });
    expect(div.querySelector(".zero-marker")).not.toBeNull();
  });
});

describe("heatmap", () => {
  it("lays out rows and columns exactly in the served orders", () => {
    const hm = artifact.summaries.importance_heatmap;
    const div = freshDiv();
    renderHeatmap(div, hm);
    const svg = div.querySelector(".importance-heatmap")!;
    expect(svg.getAttribute("data-row-order")).toBe(hm.row_order.join(","));
    expect(svg.getAttribute("data-col-order")).toBe(hm.col_order.join(","));

    const renderedRows = [...div.querySelectorAll(".heatmap-row")].map((n) =>
      Number(n.getAttribute("data-cluster")),
    );
    expect(renderedRows).toEqual(hm.row_order.map((r) => hm.cluster_ids[r]));

    const firstRowCols = [...div.querySelectorAll(".heatmap-row")][0];
    const colIdx = [...firstRowCols.querySelectorAll(".heatmap-cell")].map((n) =>
      Number(n.getAttribute("data-col")),
    );
    expect(colIdx).toEqual(hm.col_order);
  });

  it("copies cell values verbatim", () => {
    const hm = artifact.summaries.importance_heatmap;
    const div = freshDiv();
    renderHeatmap(div, hm);
    for (const cell of div.querySelectorAll(".heatmap-cell")) {
      const r = Number(cell.getAttribute("data-row"));
      const c = Number(cell.getAttribute("data-col"));
      expect(Number(cell.getAttribute("data-value"))).toBe(hm.cells[r][c]);
    }
  });

  it("legend lists features in display order", () => {
    const hm = artifact.summaries.importance_heatmap;
    const div = freshDiv();
    renderHeatmap(div, hm);
    const legend = [...div.querySelectorAll(".heatmap-feature-list li")].map((n) => n.textContent);
    expect(legend).toEqual(hm.col_order.map((c) => hm.features[c]));
  });
});

describe("importance summary", () => {
  it("renders intensities and shares exactly as served", () => {
    const summary = artifact.summaries.importance_summary;
    const div = freshDiv();
    renderSummary(div, summary);
    const clusters = [...div.querySelectorAll(".summary-cluster")];
    expect(clusters.length).toBe(summary.clusters.length);
    clusters.forEach((node, r) => {
      const cells = [...node.querySelectorAll(".summary-cell")];
      expect(cells.length).toBe(summary.clusters[r].features.length);
      cells.forEach((cell, c) => {
        const feat = summary.clusters[r].features[c];
        expect(cell.getAttribute("data-feature")).toBe(feat.feature);
        expect(Number(cell.getAttribute("data-intensity"))).toBe(feat.mean_abs_shapley);
        expect(Number(cell.getAttribute("data-share"))).toBe(feat.share);
      });
    });
  });
});

describe("dot plot", () => {
  it("draws each top feature's points with exact shapley positions and row ids", () => {
    const cluster = artifact.summaries.clusters[0];
    const state = new ViewState();
    state.setArtifact(artifact);
    const div = freshDiv();
    renderDotPlot(div, cluster, state);
    const rows = [...div.querySelectorAll(".dot-feature")];
    expect(rows.map((n) => n.getAttribute("data-feature"))).toEqual(
      cluster.dot_plot.features.map((f) => f.feature),
    );
    rows.forEach((node, r) => {
      const feat = cluster.dot_plot.features[r];
      const dots = [...node.querySelectorAll(".dot")];
      expect(dots.length).toBe(feat.points.length);
      dots.forEach((dot, i) => {
        expect(Number(dot.getAttribute("data-row-id"))).toBe(feat.points[i].row_id);
        expect(Number(dot.getAttribute("data-shapley"))).toBe(feat.points[i].shapley);
      });
    });
  });

  it("highlights only brushed rows and draws the KDE panel", () => {
    const cluster = artifact.summaries.clusters[2];
    const state = new ViewState();
    state.setArtifact(artifact);
    const someRow = cluster.dot_plot.features[0].points[0].row_id;
    state.setBrushed([someRow]);
    const div = freshDiv();
    renderDotPlot(div, cluster, state);
    const highlighted = [...div.querySelectorAll(".dot")].filter(
      (d) => d.getAttribute("stroke") === "#111",
    );
    expect(new Set(highlighted.map((d) => d.getAttribute("data-row-id")))).toEqual(
      new Set([String(someRow)]),
    );
    const bins = [...div.querySelectorAll(".kde-bin")];
    expect(bins.length).toBe(cluster.aggregated_kde.bins.length);
    bins.forEach((bin, i) => {
      expect(Number(bin.getAttribute("data-count"))).toBe(cluster.aggregated_kde.bins[i].count);
    });
  });
});

describe("view state", () => {
  it("keeps brushed ids inside the embedding's row range", () => {
    const state = new ViewState();
    state.setArtifact(artifact);
    state.setBrushed([0, 5, 149, 150, 9999, -3]);
    expect([...state.brushedRowIds].sort((a, b) => a - b)).toEqual([0, 5, 149]);
    expect(state.explainedRowIds()).toEqual(new Set(artifact.explanation.test_indices));
  });
});
