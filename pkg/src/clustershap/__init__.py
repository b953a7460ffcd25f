"""Shapley-value explanations for clusters in dimensionality-reduction
scatter plots: annotate clusters, explain the cluster-probability model
per feature, and emit the visual-summary artifacts."""

from . import errors
from .annotation import ClusterAssignment, LassoPolygon, agglomerative, annotate, kmeans, lasso_assign
from .artifact import (
    SCHEMA_VERSION,
    artifact_id,
    build_artifact,
    dumps_canonical,
    load_explanation,
    save_explanation,
    validate_artifact,
)
from .cluster_model import CentroidSet, centroids, cluster_probabilities, cluster_probability
from .dataset import Dataset, load_dataset, save_dataset, standardize
from .embedding import Embedding, load_embedding, pca_embed
from .seriation import (
    adjacent_distance_sum,
    cut_tree,
    linkage_matrix,
    natural_leaf_order,
    optimal_leaf_order,
    pairwise_distances,
)
from .shapley import (
    ExplanationConfig,
    ExplanationMatrix,
    default_budget,
    exact_shapley,
    explain_all,
    kernel_shap_explain,
    kernel_weight,
    marginalize,
    sample_coalitions,
    split,
)
from .summaries import (
    aggregated_kde,
    cluster_artifacts,
    dot_plot,
    importance_heatmap,
    importance_summary,
    interleaved_histograms,
    rank_features,
    top_features,
)

__version__ = "0.1.0"
