/** Central view state with a change bus. Brushed row ids are constrained to
 * rows the artifact explained (dot plots highlight explained rows only)
 * plus anything visible in the scatter. */

import type { Artifact } from "./types";

export type StateListener = (state: ViewState) => void;

export class ViewState {
  artifact: Artifact | null = null;
  datasetId: string | null = null;
  coords: [number, number][] = [];
  labels: number[] = [];
  selectedCluster: number | null = null;
  hoverCluster: number | null = null;
  brushedRowIds: Set<number> = new Set();
  lassoMode = false;

  private listeners: StateListener[] = [];

  subscribe(fn: StateListener): void {
    this.listeners.push(fn);
  }

  notify(): void {
    for (const fn of this.listeners) {
      fn(this);
    }
  }

  setArtifact(artifact: Artifact | null): void {
    this.artifact = artifact;
    if (artifact) {
      this.coords = artifact.embedding.coords;
      this.labels = artifact.assignment.labels;
      this.selectedCluster = null;
      this.brushedRowIds.clear();
    }
    this.notify();
  }

  /** Keep only ids that exist in the scatter; rows outside the explained
   * subset stay brushable in the scatter but dot plots ignore them. */
  setBrushed(rowIds: Iterable<number>): void {
    const limit = this.coords.length;
    this.brushedRowIds = new Set([...rowIds].filter((r) => r >= 0 && r < limit));
    this.notify();
  }

  explainedRowIds(): Set<number> {
    return new Set(this.artifact ? this.artifact.explanation.test_indices : []);
  }
}
