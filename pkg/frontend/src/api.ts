/** Typed client for the explanation service. Artifact fetches retry once
 * before surfacing the failure. */

import type { Artifact, DatasetInfo, ExplanationListEntry, Polygon } from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

async function check<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let name = `HTTP${resp.status}`;
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      name = body.error ?? name;
      detail = body.detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, name, detail);
  }
  return (await resp.json()) as T;
}

export async function uploadDataset(csv: string, labelColumn: string | null): Promise<DatasetInfo> {
  const params = labelColumn ? `?label_column=${encodeURIComponent(labelColumn)}` : "";
  const resp = await fetch(`/datasets${params}`, {
    method: "POST",
    headers: { "content-type": "text/csv" },
    body: csv,
  });
  return check<DatasetInfo>(resp);
}

export async function computePcaEmbedding(datasetId: string): Promise<[number, number][]> {
  const resp = await fetch(`/datasets/${datasetId}/embedding`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ method: "pca" }),
  });
  const body = await check<{ coords: [number, number][] }>(resp);
  return body.coords;
}

export async function uploadEmbedding(datasetId: string, csv: string): Promise<[number, number][]> {
  const resp = await fetch(`/datasets/${datasetId}/embedding`, {
    method: "POST",
    headers: { "content-type": "text/csv" },
    body: csv,
  });
  const body = await check<{ coords: [number, number][] }>(resp);
  return body.coords;
}

export interface ClusterRequest {
  method: "labeled" | "kmeans" | "agglomerative" | "manual";
  k?: number;
  seed?: number;
  linkage?: string;
  polygons?: Polygon[];
}

export async function postClusters(
  datasetId: string,
  body: ClusterRequest,
): Promise<{ k: number; labels: number[] }> {
  const resp = await fetch(`/datasets/${datasetId}/clusters`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  return check<{ k: number; labels: number[] }>(resp);
}

export async function runExplain(
  datasetId: string,
  config: Record<string, unknown>,
): Promise<{ explanation_id: string; run_id: string }> {
  const resp = await fetch(`/datasets/${datasetId}/explain`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(config),
  });
  return check<{ explanation_id: string; run_id: string }>(resp);
}

export interface RunInfo {
  run_id: string;
  dataset_id: string;
  status: string;
  progress: number;
}

export async function getRun(runId: string): Promise<RunInfo> {
  return check(await fetch(`/runs/${runId}`));
}

export async function listRuns(): Promise<RunInfo[]> {
  return check(await fetch("/runs"));
}

export async function listExplanations(): Promise<ExplanationListEntry[]> {
  return check(await fetch("/explanations"));
}

export async function getArtifact(explanationId: string): Promise<Artifact> {
  try {
    return check<Artifact>(await fetch(`/explanations/${explanationId}`));
  } catch (first) {
    try {
      return check<Artifact>(await fetch(`/explanations/${explanationId}`));
    } catch {
      throw first;
    }
  }
}
