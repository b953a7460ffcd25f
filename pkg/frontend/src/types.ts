/** Artifact schema (cluster-shapley/1) served by the explanation service. */

export interface HistogramSlot {
  position: [number, number];
  side: "above_mean" | "below_mean";
  density: number;
  count: number;
  wide: boolean;
}

export interface InterleavedHistogram {
  feature_index: number;
  feature: string;
  feature_mean: number;
  shapley_min: number;
  shapley_max: number;
  bins: HistogramSlot[];
}

export interface DotPlotPoint {
  row_id: number;
  shapley: number;
  feature_value: number;
}

export interface DotPlotFeature {
  feature_index: number;
  feature: string;
  points: DotPlotPoint[];
  density: { bin_edges: number[]; counts: number[] };
}

export interface DotPlot {
  cluster_id: number;
  shapley_min: number;
  shapley_max: number;
  features: DotPlotFeature[];
}

export interface KdeBin {
  limits: [number, number];
  member_feature_indices: number[];
  member_features: string[];
  count: number;
  curve_above: number[] | null;
  curve_below: number[] | null;
}

export interface AggregatedKde {
  cluster_id: number;
  score_min: number;
  score_max: number;
  shapley_min: number;
  shapley_max: number;
  curve_x: number[];
  bins: KdeBin[];
}

export interface ClusterSummary {
  cluster_id: number;
  ranked_features: number[];
  top_features: number[];
  histograms: InterleavedHistogram[];
  dot_plot: DotPlot;
  aggregated_kde: AggregatedKde;
}

export interface SummaryFeature {
  feature_index: number;
  feature: string;
  mean_abs_shapley: number;
  share: number;
}

export interface ImportanceSummary {
  clusters: { cluster_id: number; features: SummaryFeature[] }[];
}

export interface ImportanceHeatmap {
  cluster_ids: number[];
  feature_indices: number[];
  features: string[];
  cells: number[][];
  row_order: number[];
  col_order: number[];
}

export interface Artifact {
  schema: string;
  dataset: {
    id: string;
    n: number;
    m: number;
    feature_names: string[];
    standardize: string;
  };
  embedding: { method_tag: string; coords: [number, number][] };
  assignment: { method: string; k: number; labels: number[] };
  config: Record<string, unknown>;
  explanation: {
    base: number[];
    test_indices: number[];
    feature_values: number[][];
    fx: number[][];
    phi: number[][][];
  };
  summaries: {
    clusters: ClusterSummary[];
    importance_summary: ImportanceSummary;
    importance_heatmap: ImportanceHeatmap;
  };
}

export interface Polygon {
  cluster_id: number;
  vertices: [number, number][];
}

export interface DatasetInfo {
  dataset_id: string;
  n: number;
  m: number;
  feature_names: string[];
  has_labels: boolean;
  label_names: string[] | null;
}

export interface ExplanationListEntry {
  explanation_id: string;
  dataset_id: string;
  n: number;
  m: number;
  k: number;
  method: string;
}
