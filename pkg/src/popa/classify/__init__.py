"""From-scratch classifiers behind a single train/predict interface."""

from .dataset import Dataset, rank_encode
from .forest import (
    DecisionTree,
    ForestPayload,
    bootstrap_indices,
    default_mtry,
    per_tree_seed,
    train_tree,
)
from .knn import KnnPayload
from .model import (
    ALGORITHM_NAMES,
    AlgorithmSpec,
    Prediction,
    TrainedModel,
    model_from_text,
    model_to_text,
    predict,
    predict_batch,
    train_forest,
    train_knn,
    train_model,
    train_svm_ovo,
    votes_batch,
)
from .splitting import best_split, gini
from .svm import SvmPayload

__all__ = [
    "ALGORITHM_NAMES",
    "AlgorithmSpec",
    "Dataset",
    "DecisionTree",
    "ForestPayload",
    "KnnPayload",
    "Prediction",
    "SvmPayload",
    "TrainedModel",
    "best_split",
    "bootstrap_indices",
    "default_mtry",
    "gini",
    "model_from_text",
    "model_to_text",
    "per_tree_seed",
    "predict",
    "predict_batch",
    "rank_encode",
    "train_forest",
    "train_knn",
    "train_model",
    "train_svm_ovo",
    "train_tree",
    "votes_batch",
]
