"""TF-IDF vectorization of normalized token lists.

This is the single pluggable text-embedding point: anything exposing
``fit`` over a token-list corpus and ``transform`` to a MessageVector
can stand in for it. The normative formulas, chosen so that independent
implementations agree bit-for-bit:

    idf(t) = ln((1 + N) / (1 + df(t))) + 1      (N documents, df = doc frequency)
    component(t) = count(t in doc) * idf(t), then L2-normalized

Tokens below the minimum document frequency never enter the vocabulary,
which is what eliminates one-off generated names from the model.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np


class VectorizerError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MessageVector:
    """Sparse nonnegative vector with unit L2 norm (or all-zero).

    ``indices`` are strictly increasing column positions; ``values`` the
    matching components.
    """

    indices: np.ndarray
    values: np.ndarray
    dimension: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int32))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @property
    def is_zero(self) -> bool:
        return self.indices.size == 0

    def norm(self) -> float:
        return math.sqrt(float(np.dot(self.values, self.values)))

    def dot(self, other: "MessageVector") -> float:
        """Sparse dot product, accumulated in ascending index order."""
        if self.dimension != other.dimension:
            raise VectorizerError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}")
        total = 0.0
        i = j = 0
        a_idx, a_val = self.indices, self.values
        b_idx, b_val = other.indices, other.values
        while i < a_idx.size and j < b_idx.size:
            ai, bj = a_idx[i], b_idx[j]
            if ai == bj:
                total += float(a_val[i]) * float(b_val[j])
                i += 1
                j += 1
            elif ai < bj:
                i += 1
            else:
                j += 1
        return total

    def to_pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MessageVector):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"MessageVector(dim={self.dimension}, nnz={self.indices.size})"


def zero_vector(dimension: int) -> MessageVector:
    return MessageVector(np.empty(0, dtype=np.int32), np.empty(0, dtype=np.float64), dimension)


@dataclass(frozen=True, eq=False)
class VectorizerModel:
    """Frozen vocabulary and idf weights fitted from a token corpus."""

    vocabulary: dict[str, int]
    idf: np.ndarray
    min_term_frequency: int

    @property
    def dimension(self) -> int:
        return len(self.vocabulary)

    @classmethod
    def fit(cls, corpus: Sequence[Iterable[str]], min_term_frequency: int = 3) -> "VectorizerModel":
        """Fit vocabulary and idf over a non-empty corpus of token lists.

        The vocabulary keeps tokens whose document frequency is at least
        ``min_term_frequency``, ordered lexicographically so column
        indices are deterministic regardless of corpus order.
        """

        if min_term_frequency < 1:
            raise VectorizerError("min_term_frequency must be positive")
        if len(corpus) == 0:
            raise VectorizerError("cannot fit a vectorizer on an empty corpus")
        df: Counter[str] = Counter()
        for tokens in corpus:
            df.update(set(tokens))
        kept = sorted(t for t, n in df.items() if n >= min_term_frequency)
        vocabulary = {t: i for i, t in enumerate(kept)}
        n_docs = len(corpus)
        idf = np.array(
            [math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in kept], dtype=np.float64)
        return cls(vocabulary=vocabulary, idf=idf, min_term_frequency=min_term_frequency)

    def transform(self, tokens: Iterable[str]) -> MessageVector:
        """Map a token list to its L2-normalized tf-idf vector.

        Tokens outside the vocabulary are ignored; an empty or fully
        out-of-vocabulary input yields the all-zero vector.
        """

        counts: Counter[int] = Counter()
        vocab = self.vocabulary
        for t in tokens:
            col = vocab.get(t)
            if col is not None:
                counts[col] += 1
        if not counts:
            return zero_vector(self.dimension)
        cols = np.array(sorted(counts), dtype=np.int32)
        vals = np.array([counts[int(c)] for c in cols], dtype=np.float64) * self.idf[cols]
        norm = math.sqrt(float(np.dot(vals, vals)))
        vals = vals / norm
        return MessageVector(cols, vals, self.dimension)

    def to_dict(self) -> dict[str, Any]:
        tokens = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "tokens": tokens,
            "idf": [float(v) for v in self.idf],
            "min_term_frequency": self.min_term_frequency,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "VectorizerModel":
        tokens = list(raw["tokens"])
        return cls(
            vocabulary={t: i for i, t in enumerate(tokens)},
            idf=np.array(raw["idf"], dtype=np.float64),
            min_term_frequency=int(raw["min_term_frequency"]),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorizerModel):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and np.array_equal(self.idf, other.idf)
            and self.min_term_frequency == other.min_term_frequency
        )
