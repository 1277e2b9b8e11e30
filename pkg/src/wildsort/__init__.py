"""wildsort: unsupervised organization of wildlife image-crop embeddings.

Clustering (EM-fitted Gaussian mixtures with BIC model selection, DBSCAN),
continuous 1D similarity ordering with a run-coherence metric, and post-hoc
evaluation against ground-truth species labels.
"""

__version__ = "0.1.0"

from .assignments import NOISE, HardAssignment
from .data import (
    EmbeddingMatrix,
    ItemRecord,
    l2_normalize,
    load_embeddings,
    save_embeddings,
)
from .dbscan import Dbscan, k_distance_profile
from .evaluation import EvalReport, evaluate, match_clusters, matched_accuracy
from .fixtures import FixtureSpec, generate
from .gmm import (
    BicReport,
    GaussianMixtureEM,
    bic_score,
    free_param_count,
    select_components,
)
from .lowdim import LowDimEmbedding
from .ordering import aggregate_runs, coherence, sort_1d
from .pca import PcaReducer
from .tsne import TsneEmbedder
from .umap import UmapEmbedder

__all__ = [
    "NOISE",
    "HardAssignment",
    "EmbeddingMatrix",
    "ItemRecord",
    "l2_normalize",
    "load_embeddings",
    "save_embeddings",
    "Dbscan",
    "k_distance_profile",
    "EvalReport",
    "evaluate",
    "match_clusters",
    "matched_accuracy",
    "FixtureSpec",
    "generate",
    "BicReport",
    "GaussianMixtureEM",
    "bic_score",
    "free_param_count",
    "select_components",
    "LowDimEmbedding",
    "aggregate_runs",
    "coherence",
    "sort_1d",
    "PcaReducer",
    "TsneEmbedder",
    "UmapEmbedder",
]
