"""Community association strength scores and their post-processing uses."""

__version__ = "0.1.0"

from .graph import Cover, Graph, GraphFormatError, Partition
from .io import load_edge_list, read_edge_list
from .scores import ScoreKind, binomial_cdf, ief, max_score, nief, p_score, rank_communities, score_all
from .louvain import louvain, louvain_level1, modularity
from .ecg import EcgConfig, Scheme, cas_ecg
from .overlap import RefineConfig, count_outliers, ego_split, refine_cover
from .metrics import ami, k_rank_accuracy, onmi, outlier_experiment, roc
from .benchgen import GenConfig, generate

__all__ = [
    "Cover", "Graph", "GraphFormatError", "Partition", "load_edge_list", "read_edge_list",
    "ScoreKind", "binomial_cdf", "ief", "nief", "p_score", "max_score", "rank_communities",
    "score_all", "louvain", "louvain_level1", "modularity", "EcgConfig", "Scheme", "cas_ecg",
    "RefineConfig", "count_outliers", "ego_split", "refine_cover", "ami", "k_rank_accuracy",
    "onmi", "outlier_experiment", "roc", "GenConfig", "generate",
]
