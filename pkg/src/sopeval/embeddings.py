"""Pre-trained word vector tables and the features derived from them:
averaged document vector, out-of-vocabulary count, and adjacent-sentence
content-word similarity."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import EmbeddingError
from .textual import TokenizedDoc


@dataclass(frozen=True)
class EmbeddingTable:
    """Read-only word -> vector mapping with a fixed dimension. Lookups are
    case-preserving with a lowercase fallback."""

    dimension: int
    vectors: Mapping[str, np.ndarray]

    @property
    def vocab_size(self) -> int:
        return len(self.vectors)

    def lookup(self, word: str):
        vec = self.vectors.get(word)
        if vec is None:
            vec = self.vectors.get(word.lower())
        return vec

    def __contains__(self, word: str) -> bool:
        return self.lookup(word) is not None


def load_embeddings(path: str | Path, expected_dimension: int | None = None) -> EmbeddingTable:
    """Parse whitespace-separated text vectors ("word v1 ... vD"), with an
    optional leading "count dim" header. Every row must have one consistent
    dimension."""
    path = Path(path)
    if not path.is_file():
        raise EmbeddingError(f"embedding file not found: {path}")

    vectors: dict[str, np.ndarray] = {}
    dimension = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    declared_count, declared_dim = int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    if declared_dim < 1 or declared_count < 0:
                        raise EmbeddingError(f"{path}:1: invalid header {raw.strip()!r}")
                    dimension = declared_dim
                    continue
            word, values = parts[0], parts[1:]
            if dimension is None:
                dimension = len(values)
                if dimension == 0:
                    raise EmbeddingError(f"{path}:{lineno}: row has no vector components")
            if len(values) != dimension:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dimension} components, found {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric component") from exc
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"{path}:{lineno}: non-finite component")
            vectors[word] = vec

    if dimension is None or not vectors:
        raise EmbeddingError(f"{path}: no vectors found")
    if expected_dimension is not None and dimension != expected_dimension:
        raise EmbeddingError(
            f"{path}: dimension {dimension} does not match expected {expected_dimension}"
        )
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def write_embeddings(table: EmbeddingTable, path: str | Path, header: bool = True) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{table.vocab_size} {table.dimension}\n")
        for word, vec in table.vectors.items():
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero vectors yield 0.0 rather than dividing by zero."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def avg_word_vector(doc: TokenizedDoc, table: EmbeddingTable) -> np.ndarray:
    """Componentwise mean over in-vocabulary word tokens (one contribution per
    occurrence); the zero vector when nothing is in vocabulary."""
    found = [table.lookup(t.surface) for t in doc.word_tokens]
    found = [v for v in found if v is not None]
    if not found:
        return np.zeros(table.dimension, dtype=np.float64)
    return np.mean(np.stack(found), axis=0)


def oov_count(doc: TokenizedDoc, table: EmbeddingTable) -> int:
    """Word tokens with no vector, after the lowercase fallback."""
    return sum(1 for t in doc.word_tokens if table.lookup(t.surface) is None)


def _adjacent_pair_sims(
    doc: TokenizedDoc, table: EmbeddingTable, stopwords: frozenset
) -> list:
    sentence_vectors = []
    for sentence in doc.sentences:
        vecs = [
            table.lookup(t.surface)
            for t in sentence
            if t.is_word and t.folded() not in stopwords
        ]
        sentence_vectors.append([v for v in vecs if v is not None])

    sims: list[float] = []
    for left, right in zip(sentence_vectors, sentence_vectors[1:]):
        for u in left:
            for v in right:
                sims.append(cosine(u, v))
    return sims


def adjacent_sentence_similarity(
    doc: TokenizedDoc, table: EmbeddingTable, stopwords: frozenset
) -> tuple[float, float]:
    """Mean and maximum cosine over every cross-pair of in-vocabulary content
    words in adjacent sentences, pooled over the whole document. (0.0, 0.0)
    when no pair exists."""
    sims = _adjacent_pair_sims(doc, table, stopwords)
    if not sims:
        return (0.0, 0.0)
    return (float(np.mean(sims)), float(np.max(sims)))


@dataclass(frozen=True)
class EmbeddingFeatures:
    avg_vector: np.ndarray
    oov_count: int
    adj_sim_mean: float
    adj_sim_max: float
    degenerate_avg: bool
    degenerate_adj: bool


def embedding_features(
    doc: TokenizedDoc,
    table: EmbeddingTable,
    sim_table: EmbeddingTable | None = None,
    stopwords: frozenset = frozenset(),
) -> EmbeddingFeatures:
    """Bundle of every embedding-derived feature. The similarity features may
    use their own table (the two sources are independently configurable)."""
    avg = avg_word_vector(doc, table)
    oov = oov_count(doc, table)
    degenerate_avg = oov == len(doc.word_tokens)
    sim_source = sim_table if sim_table is not None else table
    sims = _adjacent_pair_sims(doc, sim_source, stopwords)
    degenerate_adj = not sims
    adj_mean = float(np.mean(sims)) if sims else 0.0
    adj_max = float(np.max(sims)) if sims else 0.0
    return EmbeddingFeatures(
        avg_vector=avg,
        oov_count=oov,
        adj_sim_mean=adj_mean,
        adj_sim_max=adj_max,
        degenerate_avg=degenerate_avg,
        degenerate_adj=degenerate_adj,
    )
