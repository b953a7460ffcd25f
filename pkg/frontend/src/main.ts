/** Application wiring: upload panel, annotation controls, explain run with
 * progress polling, stored-explanation loading, and the coordinated views. */

import * as api from "./api";
import { renderDotPlot } from "./dotplot";
import { renderHeatmap } from "./heatmap";
import { ScatterPlot } from "./scatter";
import { ViewState } from "./state";
import { renderSummary } from "./summary";
import { renderTooltip } from "./tooltip";
import type { Polygon } from "./types";

const state = new ViewState();
let scatter: ScatterPlot;
let explainInFlight = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const node = el<HTMLElement>("status");
  node.textContent = text;
  node.className = isError ? "status error" : "status";
}

async function refreshExplanationList(): Promise<void> {
  const listNode = el<HTMLElement>("stored-list");
  listNode.innerHTML = "";
  const entries = await api.listExplanations().catch(() => []);
  for (const entry of entries) {
    const li = document.createElement("li");
    const btn = document.createElement("button");
    btn.textContent = `${entry.explanation_id} (n=${entry.n}, k=${entry.k}, ${entry.method})`;
    btn.addEventListener("click", () => void loadArtifact(entry.explanation_id));
    li.appendChild(btn);
    listNode.appendChild(li);
  }
}

async function loadArtifact(explanationId: string): Promise<void> {
  try {
    const artifact = await api.getArtifact(explanationId);
    state.setArtifact(artifact);
    renderSummary(el("summary"), artifact.summaries.importance_summary);
    renderHeatmap(el("heatmap"), artifact.summaries.importance_heatmap);
    el<HTMLElement>("dotplot").innerHTML = "<p class='hint'>click a colored point for the detailed view</p>";
    setStatus(`loaded explanation ${explanationId}`);
  } catch (err) {
    setStatus(String(err), true);
  }
}

function showDotPlot(cluster: number): void {
  const artifact = state.artifact;
  if (!artifact) {
    return;
  }
  state.selectedCluster = cluster;
  renderDotPlot(el("dotplot"), artifact.summaries.clusters[cluster], state, (rows) => {
    state.setBrushed(rows);
    syncViews();
  });
}

function syncViews(): void {
  if (state.artifact && state.selectedCluster !== null) {
    renderDotPlot(el("dotplot"), state.artifact.summaries.clusters[state.selectedCluster], state, (rows) => {
      state.setBrushed(rows);
      syncViews();
    });
  }
}

async function submitLasso(polygons: Polygon[]): Promise<void> {
  if (!state.datasetId || !polygons.length) {
    return;
  }
  try {
    const resp = await api.postClusters(state.datasetId, { method: "manual", polygons });
    state.labels = resp.labels; // server's answer overrides the local preview
    state.notify();
    setStatus(`annotated ${resp.k} cluster(s) by lasso`);
  } catch (err) {
    scatter.clearPending();
    state.notify();
    setStatus(String(err), true);
  }
}

function wireControls(): void {
  el<HTMLButtonElement>("upload-btn").addEventListener("click", () => {
    void (async () => {
      const file = el<HTMLInputElement>("csv-file").files?.[0];
      if (!file) {
        setStatus("choose a CSV file first", true);
        return;
      }
      const labelColumn = el<HTMLInputElement>("label-column").value.trim() || null;
      try {
        const info = await api.uploadDataset(await file.text(), labelColumn);
        state.datasetId = info.dataset_id;
        state.coords = [];
        state.labels = [];
        const coords = await api.computePcaEmbedding(info.dataset_id);
        state.coords = coords;
        state.labels = new Array(coords.length).fill(-1);
        state.artifact = null;
        state.notify();
        setStatus(`dataset ${info.dataset_id}: n=${info.n}, m=${info.m}; points start unassigned (black)`);
      } catch (err) {
        setStatus(String(err), true);
      }
    })();
  });

  el<HTMLButtonElement>("annotate-btn").addEventListener("click", () => {
    void (async () => {
      if (!state.datasetId) {
        setStatus("upload a dataset first", true);
        return;
      }
      const method = el<HTMLSelectElement>("annotate-method").value;
      try {
        if (method === "manual") {
          state.lassoMode = true;
          scatter.clearPending();
          state.notify();
          setStatus("lasso mode: draw polygons, then press 'submit lassos'");
          return;
        }
        const k = parseInt(el<HTMLInputElement>("annotate-k").value || "3", 10);
        const body =
          method === "labeled"
            ? ({ method: "labeled" } as const)
            : ({ method: method as "kmeans" | "agglomerative", k, seed: 0 } as const);
        const resp = await api.postClusters(state.datasetId, body);
        state.labels = resp.labels;
        state.notify();
        setStatus(`annotated ${resp.k} clusters (${method})`);
      } catch (err) {
        setStatus(String(err), true);
      }
    })();
  });

  el<HTMLButtonElement>("lasso-submit").addEventListener("click", () => {
    state.lassoMode = false;
    const polygons = scatter.pendingPolygons();
    scatter.clearPending();
    void submitLasso(polygons);
  });

  el<HTMLButtonElement>("explain-btn").addEventListener("click", () => {
    void (async () => {
      if (!state.datasetId) {
        setStatus("upload and annotate first", true);
        return;
      }
      if (explainInFlight) {
        setStatus("an explanation run is already in flight", true);
        return;
      }
      explainInFlight = true;
      const progress = el<HTMLProgressElement>("run-progress");
      progress.hidden = false;
      progress.value = 0;
      const seed = parseInt(el<HTMLInputElement>("seed").value || "42", 10);
      const started = api.runExplain(state.datasetId, { seed });
      // the POST blocks until the run finishes; poll the run registry for
      // this dataset's active run to move the progress bar meanwhile
      const poll = window.setInterval(() => {
        void (async () => {
          const runs = await api.listRuns().catch(() => []);
          const active = runs.filter((r) => r.dataset_id === state.datasetId).pop();
          if (active) {
            progress.value = active.progress;
          }
        })();
      }, 400);
      try {
        const { explanation_id, run_id } = await started;
        const run = await api.getRun(run_id);
        progress.value = run.progress;
        await loadArtifact(explanation_id);
        await refreshExplanationList();
      } catch (err) {
        setStatus(String(err), true);
      } finally {
        window.clearInterval(poll);
        explainInFlight = false;
        progress.hidden = true;
      }
    })();
  });
}

function wireTooltip(): void {
  const tooltip = el<HTMLElement>("tooltip");
  scatter = new ScatterPlot(el("scatter"), state, {
    onHoverCluster: (cluster, event) => {
      if (cluster === null || !state.artifact) {
        tooltip.hidden = true;
        return;
      }
      renderTooltip(tooltip, state.artifact.summaries.clusters[cluster]);
      tooltip.hidden = false;
      tooltip.style.left = `${event.pageX + 14}px`;
      tooltip.style.top = `${event.pageY + 10}px`;
    },
    onClickCluster: (cluster) => showDotPlot(cluster),
    onBrush: (rows) => {
      state.setBrushed(rows);
      syncViews();
    },
  });
}

export function start(): void {
  wireTooltip();
  wireControls();
  void refreshExplanationList();
  setStatus("upload a CSV or load a stored explanation");
}

if (typeof document !== "undefined" && document.getElementById("scatter")) {
  start();
}
