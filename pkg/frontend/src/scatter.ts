/** Scatter plot of the 2-D embedding with three interactions: freehand
 * lasso annotation (draw polygons, preview membership locally, POST to the
 * server and recolor from its answer), rectangle brushing that highlights
 * the same rows in the dot plots, and hover/click per cluster for the
 * tooltip and detailed views. Unassigned points render black. */

import { select, type Selection } from "d3";

import { pointInPolygon } from "./geometry";
import { clusterColor } from "./palette";
import type { ViewState } from "./state";
import type { Polygon } from "./types";

const W = 560;
const H = 520;
const PAD = 24;

export interface ScatterCallbacks {
  onHoverCluster?: (cluster: number | null, event: MouseEvent) => void;
  onClickCluster?: (cluster: number) => void;
  onBrush?: (rowIds: number[]) => void;
}

export class ScatterPlot {
  private svg: Selection<SVGSVGElement, unknown, null, undefined>;
  private pending: Polygon[] = [];
  private drawing: [number, number][] | null = null;
  private brushStart: [number, number] | null = null;

  constructor(
    container: HTMLElement,
    private state: ViewState,
    private callbacks: ScatterCallbacks = {},
  ) {
    this.svg = select(container)
      .append("svg")
      .attr("class", "scatter")
      .attr("width", W)
      .attr("height", H);
    state.subscribe(() => this.render());
  }

  private scales() {
    const coords = this.state.coords;
    const xs = coords.map((c) => c[0]);
    const ys = coords.map((c) => c[1]);
    const xLo = Math.min(...xs);
    const xHi = Math.max(...xs);
    const yLo = Math.min(...ys);
    const yHi = Math.max(...ys);
    const sx = (v: number) => PAD + (xHi > xLo ? ((v - xLo) / (xHi - xLo)) * (W - 2 * PAD) : (W - 2 * PAD) / 2);
    const sy = (v: number) => H - PAD - (yHi > yLo ? ((v - yLo) / (yHi - yLo)) * (H - 2 * PAD) : (H - 2 * PAD) / 2);
    const ix = (p: number) => xLo + ((p - PAD) / (W - 2 * PAD)) * (xHi - xLo || 1);
    const iy = (p: number) => yLo + ((H - PAD - p) / (H - 2 * PAD)) * (yHi - yLo || 1);
    return { sx, sy, ix, iy };
  }

  render(): void {
    const { state } = this;
    this.svg.selectAll("*").remove();
    if (!state.coords.length) {
      return;
    }
    const { sx, sy, ix, iy } = this.scales();

    const dots = this.svg.append("g").attr("class", "points");
    state.coords.forEach(([cx, cy], i) => {
      const label = state.labels[i] ?? -1;
      dots
        .append("circle")
        .attr("class", "point")
        .attr("data-row-id", i)
        .attr("data-label", label)
        .attr("cx", sx(cx))
        .attr("cy", sy(cy))
        .attr("r", state.brushedRowIds.has(i) ? 5 : 3)
        .attr("stroke", state.brushedRowIds.has(i) ? "#111" : "none")
        .attr("fill", clusterColor(label))
        .on("mouseenter", (event: MouseEvent) => {
          if (label >= 0) {
            this.callbacks.onHoverCluster?.(label, event);
          }
        })
        .on("mouseleave", (event: MouseEvent) => this.callbacks.onHoverCluster?.(null, event))
        .on("click", () => {
          if (label >= 0) {
            this.callbacks.onClickCluster?.(label);
          }
        });
    });

    for (const poly of this.pending) {
      this.svg
        .append("polygon")
        .attr("class", "pending-lasso")
        .attr("points", poly.vertices.map(([vx, vy]) => `${sx(vx)},${sy(vy)}`).join(" "))
        .attr("fill", clusterColor(poly.cluster_id))
        .attr("fill-opacity", 0.12)
        .attr("stroke", clusterColor(poly.cluster_id));
    }

    if (state.lassoMode) {
      this.attachLassoOverlay(ix, iy);
    } else if (state.artifact) {
      this.attachBrushOverlay(sx, sy);
    }
  }

  /** Freehand lasso: collect a polygon in data coordinates per drag. */
  private attachLassoOverlay(ix: (p: number) => number, iy: (p: number) => number): void {
    const overlay = this.svg
      .append("rect")
      .attr("class", "lasso-overlay")
      .attr("width", W)
      .attr("height", H)
      .attr("fill", "transparent")
      .style("cursor", "crosshair");
    overlay
      .on("pointerdown", (event: PointerEvent) => {
        this.drawing = [[ix(event.offsetX), iy(event.offsetY)]];
      })
      .on("pointermove", (event: PointerEvent) => {
        if (this.drawing) {
          this.drawing.push([ix(event.offsetX), iy(event.offsetY)]);
          this.drawPath();
        }
      })
      .on("pointerup", () => this.finishPolygon());
  }

  /** Rectangle brush (pixel space) selecting rows for view coordination. */
  private attachBrushOverlay(sx: (v: number) => number, sy: (v: number) => number): void {
    const overlay = this.svg
      .append("rect")
      .attr("class", "brush-overlay")
      .attr("width", W)
      .attr("height", H)
      .attr("fill", "transparent");
    const rect = this.svg
      .append("rect")
      .attr("class", "brush-rect")
      .attr("fill", "#2196f3")
      .attr("fill-opacity", 0.12)
      .attr("stroke", "#2196f3")
      .attr("width", 0)
      .attr("height", 0);
    overlay
      .on("pointerdown", (event: PointerEvent) => {
        this.brushStart = [event.offsetX, event.offsetY];
      })
      .on("pointermove", (event: PointerEvent) => {
        if (!this.brushStart) {
          return;
        }
        const [x0, y0] = this.brushStart;
        rect
          .attr("x", Math.min(x0, event.offsetX))
          .attr("y", Math.min(y0, event.offsetY))
          .attr("width", Math.abs(event.offsetX - x0))
          .attr("height", Math.abs(event.offsetY - y0));
      })
      .on("pointerup", (event: PointerEvent) => {
        if (!this.brushStart) {
          return;
        }
        const [x0, y0] = this.brushStart;
        this.brushStart = null;
        const xLo = Math.min(x0, event.offsetX);
        const xHi = Math.max(x0, event.offsetX);
        const yLo = Math.min(y0, event.offsetY);
        const yHi = Math.max(y0, event.offsetY);
        if (xHi - xLo < 3 && yHi - yLo < 3) {
          this.callbacks.onBrush?.([]); // empty brush clears highlights
          return;
        }
        const hit: number[] = [];
        this.state.coords.forEach(([cx, cy], i) => {
          const px = sx(cx);
          const py = sy(cy);
          if (px >= xLo && px <= xHi && py >= yLo && py <= yHi) {
            hit.push(i);
          }
        });
        this.callbacks.onBrush?.(hit);
      });
  }

  private drawPath(): void {
    const { sx, sy } = this.scales();
    this.svg.selectAll(".lasso-path").remove();
    if (!this.drawing) {
      return;
    }
    this.svg
      .append("polyline")
      .attr("class", "lasso-path")
      .attr("points", this.drawing.map(([vx, vy]) => `${sx(vx)},${sy(vy)}`).join(" "))
      .attr("fill", "none")
      .attr("stroke", "#555")
      .attr("stroke-dasharray", "4 3");
  }

  private finishPolygon(): void {
    if (!this.drawing || this.drawing.length < 3) {
      this.drawing = null;
      this.svg.selectAll(".lasso-path").remove();
      return;
    }
    const polygon: Polygon = {
      cluster_id: this.pending.length,
      vertices: this.drawing,
    };
    this.drawing = null;
    this.pending.push(polygon);
    // local preview: recolor points this polygon would capture
    const preview = this.state.labels.slice();
    this.state.coords.forEach(([cx, cy], i) => {
      if (preview[i] < 0 && pointInPolygon(cx, cy, polygon.vertices)) {
        preview[i] = polygon.cluster_id;
      }
    });
    this.state.labels = preview;
    this.state.notify();
  }

  /** Polygons drawn since the last submit (cluster ids 0..K-1 in draw order). */
  pendingPolygons(): Polygon[] {
    return this.pending;
  }

  clearPending(): void {
    this.pending = [];
    this.drawing = null;
  }
}
