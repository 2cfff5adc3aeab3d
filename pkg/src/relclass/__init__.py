"""Relation classification between annotated entity pairs.

Two classifiers over the same corpus format: a lexical-feature + word-embedding
SVM (one-vs-one, RBF kernel, probability outputs) and a convolutional-LSTM
sequence model, plus feature extraction, random hyperparameter search and
cross-validated evaluation.
"""

__version__ = "0.1.0"
