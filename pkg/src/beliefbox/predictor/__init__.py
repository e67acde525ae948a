"""Text-regression predictor of belief-strength updates."""

from .forest import ForestModel, RegressionTree, fit_forest
from .model import (
    BeliefPredictor,
    BeliefUpdateExample,
    evaluate,
    fit_and_evaluate,
    load_examples,
    mine_examples,
    predict_new_strength,
    split_dataset,
    synthetic_corpus,
    train_predictor,
    write_examples,
)
from .ridge import RidgeModel, fit_ridge
from .tfidf import TfidfModel, fit_tfidf, tokenize

__all__ = [
    "BeliefPredictor",
    "BeliefUpdateExample",
    "ForestModel",
    "RegressionTree",
    "RidgeModel",
    "TfidfModel",
    "evaluate",
    "fit_and_evaluate",
    "fit_forest",
    "fit_ridge",
    "fit_tfidf",
    "load_examples",
    "mine_examples",
    "predict_new_strength",
    "split_dataset",
    "synthetic_corpus",
    "tokenize",
    "train_predictor",
    "write_examples",
]
