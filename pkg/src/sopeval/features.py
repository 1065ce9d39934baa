"""Feature-vector assembly: configured feature sets (T, WE, SE) in canonical
order, the reference-corpus cosine similarity, and leak-free standardization."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import embeddings as emb
from . import textual
from .corpus import Corpus, Document, LABEL_ACCEPTED, ReferenceCorpus, build_reference
from .errors import FeatureError
from .textual import LexicalResources, TokenizedDoc

FEATURE_SETS = ("T", "WE", "SE")

T_FEATURES = (
    "noun_ratio",
    "adj_ratio",
    "adv_ratio",
    "verb_ratio",
    "discourse_count",
    "fres",
    "avg_words_per_sentence",
    "avg_words_per_paragraph",
    "avg_word_length",
    "coref_distance",
    "polysemy_degree",
)
SE_BASE = ("cosine_similarity", "spell_errors", "oov_count")
SE_ADJACENT = ("adj_sim_mean", "adj_sim_max")

HIGH_OOV_FRACTION = 0.2


@dataclass(frozen=True)
class FeatureConfig:
    """Which feature sets and toggles are active. Serializes canonically so
    reports and model files can cite the exact configuration by hash."""

    enabled_sets: tuple = ("T", "WE", "SE")
    embedding_dimension: int | None = None
    include_ne_count: bool = False
    se_adjacent_similarity: bool = False
    normalize_per_1000: bool = False
    reference_tfidf: bool = True
    resource_dir: str | None = None
    embeddings_path: str | None = None
    glove_path: str | None = None

    def __post_init__(self):
        sets = tuple(s for s in FEATURE_SETS if s in self.enabled_sets)
        unknown = set(self.enabled_sets) - set(FEATURE_SETS)
        if unknown:
            raise FeatureError(f"unknown feature sets: {sorted(unknown)}")
        if not sets:
            raise FeatureError("at least one feature set must be enabled")
        object.__setattr__(self, "enabled_sets", sets)
        if "WE" in sets:
            if not isinstance(self.embedding_dimension, int) or self.embedding_dimension < 1:
                raise FeatureError("enabling WE requires a positive embedding_dimension")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def canonical_json(self) -> str:
        payload = self.to_dict()
        payload["enabled_sets"] = list(payload["enabled_sets"])
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise FeatureError(f"unknown feature config fields: {sorted(unknown)}")
        payload = dict(payload)
        if "enabled_sets" in payload:
            payload["enabled_sets"] = tuple(payload["enabled_sets"])
        return cls(**payload)


def config_hash(config: FeatureConfig) -> str:
    return hashlib.sha256(config.canonical_json().encode("utf-8")).hexdigest()


def save_config(config: FeatureConfig, path: str | Path) -> None:
    Path(path).write_text(config.canonical_json() + "\n", encoding="utf-8")


def load_config(path: str | Path) -> FeatureConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FeatureError(f"cannot read feature config {path}: {exc}") from exc
    return FeatureConfig.from_dict(payload)


def feature_names(config: FeatureConfig) -> tuple:
    """(names, sets) in canonical order: T scalars, WE components, SE scalars.
    A pure function of the configuration."""
    names: list[str] = []
    sets: list[str] = []
    if "T" in config.enabled_sets:
        t_names = T_FEATURES + (("ne_count",) if config.include_ne_count else ())
        names.extend(t_names)
        sets.extend(["T"] * len(t_names))
    if "WE" in config.enabled_sets:
        dim = config.embedding_dimension
        width = len(str(dim - 1)) if dim > 1 else 1
        names.extend(f"we_{i:0{width}d}" for i in range(dim))
        sets.extend(["WE"] * dim)
    if "SE" in config.enabled_sets:
        se_names = SE_BASE + (SE_ADJACENT if config.se_adjacent_similarity else ())
        names.extend(se_names)
        sets.extend(["SE"] * len(se_names))
    return tuple(names), tuple(sets)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: tuple
    sets: tuple
    warnings: tuple = ()

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PipelineResources:
    """Everything extraction may need. The reference corpus is per-fold state;
    the rest is immutable shared state."""

    lexical: LexicalResources
    we_table: emb.EmbeddingTable | None = None
    sim_table: emb.EmbeddingTable | None = None
    reference: ReferenceCorpus | None = None

    def with_reference(self, reference: ReferenceCorpus | None) -> "PipelineResources":
        return replace(self, reference=reference)


# ---------------------------------------------------------------------------
# Reference similarity


@lru_cache(maxsize=4096)
def _terms_of(text: str) -> Counter:
    """Memoized case-folded word bag; callers must not mutate the result."""
    return Counter(t.folded() for t in textual.tokenize(text).word_tokens)


def cosine_to_reference(
    doc: TokenizedDoc | Document | str,
    reference: ReferenceCorpus,
    tfidf: bool = True,
) -> float:
    """Cosine between the document's (TF-IDF, by default) term vector and the
    reference's, over the union vocabulary. 0.0 on empty overlap."""
    if isinstance(doc, TokenizedDoc):
        terms = Counter(t.folded() for t in doc.word_tokens)
    else:
        text = doc.text if isinstance(doc, Document) else doc
        terms = _terms_of(text)

    dot = 0.0
    q_norm_sq = 0.0
    r_norm_sq = 0.0
    for term, tf in terms.items():
        w = reference.idf(term) if tfidf else 1.0
        q = tf * w
        r = reference.term_counts.get(term, 0) * w
        dot += q * r
        q_norm_sq += q * q
    for term, count in reference.term_counts.items():
        w = reference.idf(term) if tfidf else 1.0
        r_norm_sq += (count * w) ** 2
    if q_norm_sq == 0.0 or r_norm_sq == 0.0:
        return 0.0
    return float(dot / (np.sqrt(q_norm_sq) * np.sqrt(r_norm_sq)))


# ---------------------------------------------------------------------------
# Extraction


class Featurizer:
    """Assembles feature vectors for one configuration. Fold-independent
    values are cached per document id so cross-validation does not recompute
    them; only the reference cosine changes between folds."""

    def __init__(self, config: FeatureConfig, resources: PipelineResources):
        self.config = config
        self.resources = resources
        self.names, self.sets = feature_names(config)
        self._cosine_slot = (
            self.names.index("cosine_similarity") if "SE" in config.enabled_sets else None
        )
        self._static: dict[str, tuple] = {}
        self._validate_resources()

    def _validate_resources(self) -> None:
        cfg, res = self.config, self.resources
        if "WE" in cfg.enabled_sets or "SE" in cfg.enabled_sets:
            if res.we_table is None:
                raise FeatureError(
                    "enabled sets require an embedding table (missing resource: embeddings)"
                )
            if cfg.embedding_dimension is not None and res.we_table.dimension != cfg.embedding_dimension:
                raise FeatureError(
                    f"embedding table dimension {res.we_table.dimension} does not match "
                    f"configured {cfg.embedding_dimension}"
                )
        if "SE" in cfg.enabled_sets and cfg.se_adjacent_similarity:
            if res.sim_table is None and res.we_table is None:
                raise FeatureError(
                    "adjacent-sentence similarity requires an embedding table "
                    "(missing resource: glove)"
                )

    def _static_parts(self, doc_id: str, text: str) -> tuple:
        cached = self._static.get(doc_id)
        if cached is not None:
            return cached
        cfg, res = self.config, self.resources
        tok = textual.tokenize(text)
        n_words = len(tok.word_tokens)
        values: list[float] = []
        warnings: list[str] = []

        if "T" in cfg.enabled_sets:
            tf = textual.textual_features(tok, res.lexical, include_ne=cfg.include_ne_count)
            t_vals = [
                tf.noun_ratio,
                tf.adj_ratio,
                tf.adv_ratio,
                tf.verb_ratio,
                self._scaled(tf.discourse_count, n_words),
                tf.fres,
                tf.avg_words_per_sentence,
                tf.avg_words_per_paragraph,
                tf.avg_word_length,
                float(tf.coref_distance),
                tf.polysemy_degree,
            ]
            if cfg.include_ne_count:
                t_vals.append(float(tf.ne_count))
            values.extend(t_vals)

        if "WE" in cfg.enabled_sets:
            avg = emb.avg_word_vector(tok, res.we_table)
            if emb.oov_count(tok, res.we_table) == n_words:
                warnings.append("degenerate: no word token is in the embedding vocabulary")
            values.extend(float(v) for v in avg)

        if "SE" in cfg.enabled_sets:
            oov = emb.oov_count(tok, res.we_table)
            if n_words and oov / n_words > HIGH_OOV_FRACTION:
                warnings.append(f"high out-of-vocabulary rate: {oov}/{n_words} word tokens")
            se_vals = [
                0.0,  # cosine slot, filled per reference
                self._scaled(textual.spell_errors(tok, res.lexical), n_words),
                float(oov),
            ]
            if cfg.se_adjacent_similarity:
                sim_table = res.sim_table if res.sim_table is not None else res.we_table
                sims = emb._adjacent_pair_sims(tok, sim_table, res.lexical.stopwords)
                if not sims:
                    warnings.append("degenerate: no adjacent-sentence content-word pair")
                    se_vals.extend([0.0, 0.0])
                else:
                    se_vals.extend([float(np.mean(sims)), float(np.max(sims))])
            values.extend(se_vals)

        parts = (np.array(values, dtype=np.float64), tuple(warnings))
        self._static[doc_id] = parts
        return parts

    def _scaled(self, count: int, n_words: int) -> float:
        if self.config.normalize_per_1000:
            return count * 1000.0 / n_words
        return float(count)

    def vector(
        self, document: Document | str, reference: ReferenceCorpus | None = None
    ) -> FeatureVector:
        if isinstance(document, Document):
            doc_id, text = document.id, document.text
        else:
            doc_id, text = "", document
        static_values, warnings = self._static_parts(doc_id or text, text)
        values = static_values.copy()
        if self._cosine_slot is not None:
            ref = reference if reference is not None else self.resources.reference
            if ref is None:
                raise FeatureError(
                    "SE features require a reference corpus (missing resource: reference)"
                )
            values[self._cosine_slot] = cosine_to_reference(
                text, ref, tfidf=self.config.reference_tfidf
            )
        return FeatureVector(values=values, names=self.names, sets=self.sets, warnings=warnings)


def extract(
    document: Document | str, config: FeatureConfig, resources: PipelineResources
) -> FeatureVector:
    """Single-document extraction; exactly the Featurizer path without a
    persistent cache."""
    return Featurizer(config, resources).vector(document)


# ---------------------------------------------------------------------------
# Standardization


@dataclass(frozen=True)
class Standardizer:
    """Per-column mean/std learned from training rows only. Zero-variance
    columns transform to 0."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = _as_matrix(matrix)
        if matrix.shape[1] != self.mean.shape[0]:
            raise FeatureError(
                f"matrix has {matrix.shape[1]} columns, standardizer expects {self.mean.shape[0]}"
            )
        safe = np.where(self.std > 0.0, self.std, 1.0)
        out = (matrix - self.mean) / safe
        out[:, self.std == 0.0] = 0.0
        return out


def _as_matrix(matrix) -> np.ndarray:
    try:
        arr = np.asarray(matrix, dtype=np.float64)
    except ValueError as exc:
        raise FeatureError(f"ragged matrix: {exc}") from exc
    if arr.ndim != 2 or arr.dtype == object:
        raise FeatureError(f"expected a rectangular 2-d matrix, got shape {arr.shape}")
    return arr


def fit_standardizer(train_matrix) -> Standardizer:
    matrix = _as_matrix(train_matrix)
    if matrix.size == 0:
        raise FeatureError("cannot fit a standardizer on an empty matrix")
    return Standardizer(mean=matrix.mean(axis=0), std=matrix.std(axis=0))


def apply_standardizer(std: Standardizer, matrix) -> np.ndarray:
    return std.transform(matrix)


# ---------------------------------------------------------------------------
# Corpus-level assembly


def training_matrix(
    train_corpus: Corpus,
    featurizer: Featurizer,
    compat_corpus: Corpus | None = None,
) -> tuple:
    """Feature rows for a training corpus.

    The reference is built from the training corpus's accepted essays, and
    each accepted document is scored against a reference that excludes itself
    (leave-one-out). compat_corpus reproduces the source method's behavior of
    building the reference over the full dataset instead; it leaks labels and
    exists only behind this explicit argument.

    Returns (ids, matrix, full_reference). full_reference is None when SE is
    disabled.
    """
    se_enabled = "SE" in featurizer.config.enabled_sets
    base = compat_corpus if compat_corpus is not None else train_corpus
    full_ref = build_reference(base) if se_enabled else None
    rows = []
    for doc in train_corpus:
        ref = full_ref
        if se_enabled and doc.label == LABEL_ACCEPTED:
            ref = build_reference(base, {doc.id})
        rows.append(featurizer.vector(doc, ref).values)
    return train_corpus.ids, np.vstack(rows), full_ref


def evaluation_matrix(
    docs: Corpus,
    featurizer: Featurizer,
    full_reference: ReferenceCorpus | None,
    compat_corpus: Corpus | None = None,
) -> tuple:
    """Feature rows for held-out documents against a fixed training-fold
    reference. In compat mode accepted documents are again left out of the
    full-dataset reference before scoring."""
    se_enabled = "SE" in featurizer.config.enabled_sets
    rows = []
    for doc in docs:
        ref = full_reference
        if se_enabled and compat_corpus is not None and doc.label == LABEL_ACCEPTED:
            ref = build_reference(compat_corpus, {doc.id})
        rows.append(featurizer.vector(doc, ref).values)
    return docs.ids, np.vstack(rows)


def export_matrix(path: str | Path, ids, matrix: np.ndarray, names) -> None:
    """Delimited feature matrix: header of feature names, one document per
    row, id first."""
    matrix = _as_matrix(matrix)
    lines = ["id\t" + "\t".join(names)]
    for doc_id, row in zip(ids, matrix):
        lines.append(doc_id + "\t" + "\t".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
