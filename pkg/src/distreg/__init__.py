"""Conditional distribution regression via binned classification.

Partition the response range, train a softmax classifier over the bins
(multinomial or joint binary cross-entropy objective), and read off
density, CDF, quantile, and interval predictions, with proper-scoring
evaluation and an ensemble of random partitions for smoothing.
"""

from .data import Dataset
from .estimator import DensityEstimator, EnsembleEstimator, fit_ensemble, fit_estimator
from .nn import Network, NetworkConfig, TrainConfig, init_network, train
from .partition import Partition, even_partition, random_partition
from .scoring import ScoreReport, aqtl, coverage, crps, qtl, score_testset

__all__ = [
    "Dataset",
    "DensityEstimator",
    "EnsembleEstimator",
    "Network",
    "NetworkConfig",
    "Partition",
    "ScoreReport",
    "TrainConfig",
    "aqtl",
    "coverage",
    "crps",
    "even_partition",
    "fit_ensemble",
    "fit_estimator",
    "init_network",
    "qtl",
    "random_partition",
    "score_testset",
    "train",
]
