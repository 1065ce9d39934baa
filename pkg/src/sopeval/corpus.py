"""Essay collections: loading, validation, stratified splitting, and the
accepted-essay reference statistics used by the similarity feature."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import CorpusError
from .textual import tokenize

LABEL_ACCEPTED = "accepted"
LABEL_REJECTED = "rejected"
VALID_LABELS = (LABEL_ACCEPTED, LABEL_REJECTED)


@dataclass(frozen=True)
class Document:
    """One essay with an optional gold outcome."""

    id: str
    text: str
    label: str | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id must be non-empty")
        if not self.text.strip():
            raise CorpusError(f"document {self.id!r} has empty text")
        if self.label is not None and self.label not in VALID_LABELS:
            raise CorpusError(
                f"document {self.id!r} has label {self.label!r}; expected one of {VALID_LABELS}"
            )


@dataclass(frozen=True)
class Corpus:
    """Immutable ordered document collection with distinct ids."""

    documents: tuple
    provenance: str = ""

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def ids(self) -> tuple:
        return tuple(d.id for d in self.documents)

    def get(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise CorpusError(f"no document with id {doc_id!r}")

    def subset(self, ids: Iterable[str]) -> "Corpus":
        """Documents with the given ids, in corpus order."""
        wanted = set(ids)
        missing = wanted - set(self.ids)
        if missing:
            raise CorpusError(f"unknown document ids: {sorted(missing)}")
        return Corpus(
            documents=tuple(d for d in self.documents if d.id in wanted),
            provenance=self.provenance,
        )

    def require_labels(self) -> None:
        unlabeled = [d.id for d in self.documents if d.label is None]
        if unlabeled:
            raise CorpusError(f"unlabeled documents: {unlabeled[:5]}")

    def class_counts(self) -> dict:
        counts = {LABEL_ACCEPTED: 0, LABEL_REJECTED: 0}
        for doc in self.documents:
            if doc.label is not None:
                counts[doc.label] += 1
        return counts


def load_corpus(path: str | Path, require_labels: bool = True) -> Corpus:
    """Read a line-delimited corpus file (one JSON record per line with fields
    id, text, and optionally label). Labels may be absent only for prediction."""
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    documents = []
    seen = set()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: malformed record: {exc.msg}") from exc
        if not isinstance(record, dict) or "id" not in record or "text" not in record:
            raise CorpusError(f"{path}:{lineno}: record must have 'id' and 'text' fields")
        doc_id = str(record["id"])
        if doc_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
        seen.add(doc_id)
        label = record.get("label")
        if label is None and require_labels:
            raise CorpusError(f"{path}:{lineno}: document {doc_id!r} is missing its label")
        try:
            documents.append(Document(id=doc_id, text=str(record["text"]), label=label))
        except CorpusError as exc:
            raise CorpusError(f"{path}:{lineno}: {exc.args[0]}") from exc
    return Corpus(documents=tuple(documents), provenance=str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus:
            record = {"id": doc.id, "text": doc.text}
            if doc.label is not None:
                record["label"] = doc.label
            fh.write(json.dumps(record) + "\n")


# ---------------------------------------------------------------------------
# Splitting


@dataclass(frozen=True)
class FoldAssignment:
    """Maps every document id to a fold index in [0, k)."""

    k: int
    assignment: Mapping[str, int]

    def fold_ids(self, fold: int) -> tuple:
        return tuple(doc_id for doc_id, f in self.assignment.items() if f == fold)

    def split(self, fold: int) -> tuple:
        """(train ids, test ids) for the given held-out fold."""
        train, test = [], []
        for doc_id, f in self.assignment.items():
            (test if f == fold else train).append(doc_id)
        return tuple(train), tuple(test)


def _shuffled_by_class(corpus: Corpus, seed: int) -> list:
    """Ids grouped by class (accepted first), each group shuffled by the
    seeded generator. The basis for every stratified operation here."""
    corpus.require_labels()
    rng = np.random.default_rng(seed)
    groups = []
    for label in VALID_LABELS:
        ids = [d.id for d in corpus if d.label == label]
        rng.shuffle(ids)
        groups.append(ids)
    return groups


def stratified_kfold(corpus: Corpus, k: int, seed: int) -> FoldAssignment:
    """Shuffle within class, then deal round-robin into k folds, continuing
    the deal across classes so fold sizes stay within one document."""
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    groups = _shuffled_by_class(corpus, seed)
    smallest = min(len(g) for g in groups)
    if k > smallest:
        raise CorpusError(f"k={k} exceeds smallest class size {smallest}")
    assignment = {}
    position = 0
    for ids in groups:
        for doc_id in ids:
            assignment[doc_id] = position % k
            position += 1
    # report in corpus order for stable serialization
    ordered = {doc_id: assignment[doc_id] for doc_id in corpus.ids}
    return FoldAssignment(k=k, assignment=ordered)


def _largest_remainder(counts: list, fraction: float) -> list:
    """Per-class allocation whose total matches round(total*fraction)."""
    total_target = int(round(sum(counts) * fraction))
    base = [int(np.floor(c * fraction)) for c in counts]
    remainders = [c * fraction - b for c, b in zip(counts, base)]
    leftover = total_target - sum(base)
    order = sorted(range(len(counts)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def holdout_split(
    corpus: Corpus,
    train_fraction: float,
    seed: int,
    tune_fraction: float | None = None,
) -> tuple:
    """Stratified holdout. Returns (train, test) or, with tune_fraction,
    (train, tune, test) where tune_fraction applies to the non-train part."""
    if not 0.0 < train_fraction < 1.0:
        raise CorpusError(f"train_fraction must be in (0,1), got {train_fraction}")
    if tune_fraction is not None and not 0.0 < tune_fraction < 1.0:
        raise CorpusError(f"tune_fraction must be in (0,1), got {tune_fraction}")

    groups = _shuffled_by_class(corpus, seed)
    counts = [len(g) for g in groups]
    n_train = _largest_remainder(counts, train_fraction)
    train_ids, rest_groups = [], []
    for ids, n in zip(groups, n_train):
        train_ids.extend(ids[:n])
        rest_groups.append(ids[n:])

    parts_ids = [train_ids]
    if tune_fraction is None:
        parts_ids.append([i for g in rest_groups for i in g])
    else:
        rest_counts = [len(g) for g in rest_groups]
        n_tune = _largest_remainder(rest_counts, tune_fraction)
        tune_ids, test_ids = [], []
        for ids, n in zip(rest_groups, n_tune):
            tune_ids.extend(ids[:n])
            test_ids.extend(ids[n:])
        parts_ids.extend([tune_ids, test_ids])

    if any(len(p) == 0 for p in parts_ids):
        sizes = [len(p) for p in parts_ids]
        raise CorpusError(f"degenerate split: part sizes {sizes} include an empty part")
    return tuple(corpus.subset(ids) for ids in parts_ids)


# ---------------------------------------------------------------------------
# Reference corpus


@dataclass(frozen=True)
class ReferenceCorpus:
    """Term statistics of the accepted-class essays of a (training) corpus.

    term_counts carries the concatenated accepted-essay term mass; doc_freq
    and n_docs cover every included document of both classes and back the
    smoothed IDF. Excluded documents contribute to neither.
    """

    term_counts: Mapping[str, int]
    doc_freq: Mapping[str, int]
    n_docs: int
    excluded_ids: frozenset = field(default_factory=frozenset)

    def idf(self, term: str) -> float:
        return float(np.log((1 + self.n_docs) / (1 + self.doc_freq.get(term, 0))) + 1.0)


def document_terms(text: str) -> Counter:
    """Case-folded word-token bag used for all reference-similarity math."""
    return Counter(t.folded() for t in tokenize(text).word_tokens)


def build_reference(corpus: Corpus, exclude_ids: Iterable[str] = ()) -> ReferenceCorpus:
    """Concatenated term statistics over accepted documents not excluded.
    Raises when exclusion leaves no accepted document."""
    corpus.require_labels()
    excluded = frozenset(exclude_ids)
    term_counts: Counter = Counter()
    doc_freq: Counter = Counter()
    n_docs = 0
    n_accepted = 0
    for doc in corpus:
        if doc.id in excluded:
            continue
        terms = document_terms(doc.text)
        n_docs += 1
        for term in terms:
            doc_freq[term] += 1
        if doc.label == LABEL_ACCEPTED:
            n_accepted += 1
            term_counts.update(terms)
    if n_accepted == 0:
        raise CorpusError("reference corpus is empty: no accepted documents remain")
    return ReferenceCorpus(
        term_counts=dict(term_counts),
        doc_freq=dict(doc_freq),
        n_docs=n_docs,
        excluded_ids=excluded,
    )
