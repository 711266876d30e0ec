"""Normalisation, PCA, clustering and distributional assessment."""

from .assessment import (
    DiscriminatoryPower,
    PairStat,
    PartitionComparison,
    compare_partitions,
    discriminatory_power,
)
from .cluster import Clustering, KMeans, KSelection, kmeans, select_k
from .preprocessing import (
    PCA,
    ConstantColumnWarning,
    FeatureMatrix,
    PcaModel,
    ZScoreParams,
    ZScoreScaler,
    pca_fit,
    pca_transform,
    zscore_apply,
    zscore_fit,
)
from .stats import Ecdf, KsResult, ecdf, ks_two_sample, wasserstein1

__all__ = [
    "PCA",
    "Clustering",
    "ConstantColumnWarning",
    "DiscriminatoryPower",
    "Ecdf",
    "FeatureMatrix",
    "KMeans",
    "KSelection",
    "KsResult",
    "PairStat",
    "PartitionComparison",
    "PcaModel",
    "ZScoreParams",
    "ZScoreScaler",
    "compare_partitions",
    "discriminatory_power",
    "ecdf",
    "kmeans",
    "ks_two_sample",
    "pca_fit",
    "pca_transform",
    "select_k",
    "wasserstein1",
    "zscore_apply",
    "zscore_fit",
]
