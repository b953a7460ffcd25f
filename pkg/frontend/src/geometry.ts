/** Client-side lasso preview: the same even-odd rule (points on an edge
 * count as inside, smallest cluster_id wins overlaps) the server applies.
 * The server stays authoritative; this only predicts its answer. */

import type { Polygon } from "./types";

export function pointInPolygon(px: number, py: number, vertices: [number, number][]): boolean {
  const n = vertices.length;
  let scale = 1.0;
  for (const [vx, vy] of vertices) {
    scale = Math.max(scale, Math.abs(vx), Math.abs(vy));
  }
  const eps = 1e-12 * scale;

  let inside = false;
  for (let i = 0; i < n; i++) {
    const [x1, y1] = vertices[i];
    const [x2, y2] = vertices[(i + 1) % n];
    const cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
    const withinX = px >= Math.min(x1, x2) - eps && px <= Math.max(x1, x2) + eps;
    const withinY = py >= Math.min(y1, y2) - eps && py <= Math.max(y1, y2) + eps;
    if (Math.abs(cross) <= eps * scale && withinX && withinY) {
      return true; // on the edge counts as inside
    }
    if (y1 > py !== y2 > py) {
      const xInt = x1 + ((py - y1) * (x2 - x1)) / (y2 - y1);
      if (xInt > px) {
        inside = !inside;
      }
    }
  }
  return inside;
}

/** Predicted labels for every point: smallest containing cluster_id, else -1. */
export function assignLabels(points: [number, number][], polygons: Polygon[]): number[] {
  const ordered = [...polygons].sort((a, b) => a.cluster_id - b.cluster_id);
  return points.map(([x, y]) => {
    for (const poly of ordered) {
      if (pointInPolygon(x, y, poly.vertices)) {
        return poly.cluster_id;
      }
    }
    return -1;
  });
}
