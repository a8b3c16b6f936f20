"""Fixed-length sequence embeddings learned with recurrent nets and NCA."""
from .data import LabeledDataset, PreprocessMode, load_ucr, preprocess, save_ucr
from .knn import NeighbourIndex, knn_classify, nn_accuracy
from .models import LstmParams, RnnParams, forward, model_backward
from .nca import EmbeddingSet, nca_grad, nca_objective, stochastic_accuracy
from .trainer import EmbeddingModel, TrainConfig, embed_dataset, evaluate, random_search, train

__all__ = [
    "LabeledDataset", "PreprocessMode", "load_ucr", "preprocess", "save_ucr",
    "NeighbourIndex", "knn_classify", "nn_accuracy",
    "LstmParams", "RnnParams", "forward", "model_backward",
    "EmbeddingSet", "nca_grad", "nca_objective", "stochastic_accuracy",
    "EmbeddingModel", "TrainConfig", "embed_dataset", "evaluate", "random_search", "train",
]
