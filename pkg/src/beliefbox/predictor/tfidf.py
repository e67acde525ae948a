"""TF-IDF featurizer with smoothed idf and L2-normalized rows."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DomainError

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str, min_token_len: int = 2) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= min_token_len]


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    min_token_len: int = 2
    n_documents: int = 0
    document_frequency: dict[str, int] = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def transform(self, text: str) -> dict[int, float]:
        """Sparse vector {column: weight}; empty when no token is known."""
        counts = Counter(t for t in tokenize(text, self.min_token_len) if t in self.vocabulary)
        if not counts:
            return {}
        vec = {self.vocabulary[t]: c * float(self.idf[self.vocabulary[t]]) for t, c in counts.items()}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return {k: v / norm for k, v in sorted(vec.items())}

    def transform_many(self, texts: Sequence[str]) -> np.ndarray:
        X = np.zeros((len(texts), self.n_features))
        for i, text in enumerate(texts):
            for j, v in self.transform(text).items():
                X[i, j] = v
        return X

    def to_dict(self) -> dict:
        tokens = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "vocabulary": tokens,
            "idf": [float(v) for v in self.idf],
            "min_token_len": self.min_token_len,
            "n_documents": self.n_documents,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        vocab = {t: i for i, t in enumerate(d["vocabulary"])}
        return cls(vocab, np.asarray(d["idf"], dtype=float), d["min_token_len"], d.get("n_documents", 0))


def fit_tfidf(corpus: Sequence[str], min_token_len: int = 2) -> TfidfModel:
    """idf(t) = ln((1 + N) / (1 + df(t))) + 1 over a sorted vocabulary."""
    if len(corpus) == 0:
        raise DomainError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(tokenize(doc, min_token_len)))
    tokens = sorted(df)
    n = len(corpus)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1 for t in tokens])
    return TfidfModel({t: i for i, t in enumerate(tokens)}, idf, min_token_len, n, dict(df))
