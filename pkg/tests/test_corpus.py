import json

import numpy as np
import pytest

from sopeval.corpus import (
    Corpus,
    Document,
    LABEL_ACCEPTED,
    LABEL_REJECTED,
    build_reference,
    document_terms,
    holdout_split,
    load_corpus,
    save_corpus,
    stratified_kfold,
)
from sopeval.errors import CorpusError


def make_corpus(n_accepted, n_rejected, text="Plain words here."):
    docs = [
        Document(id=f"a{i}", text=text, label=LABEL_ACCEPTED) for i in range(n_accepted)
    ] + [Document(id=f"r{i}", text=text, label=LABEL_REJECTED) for i in range(n_rejected)]
    return Corpus(documents=tuple(docs))


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestLoadCorpus:
    def test_two_wellformed_records(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [
            {"id": "s1", "text": "First essay.", "label": "accepted"},
            {"id": "s2", "text": "Second essay.", "label": "rejected"},
        ])
        corpus = load_corpus(path)
        assert len(corpus) == 2
        assert corpus.ids == ("s1", "s2")

    def test_duplicate_id_names_offender(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [
            {"id": "s1", "text": "One.", "label": "accepted"},
            {"id": "s1", "text": "Two.", "label": "rejected"},
        ])
        with pytest.raises(CorpusError, match="s1"):
            load_corpus(path)

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [{"id": "s1", "text": "   ", "label": "accepted"}])
        with pytest.raises(CorpusError, match="empty text"):
            load_corpus(path)

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "s1", "text": "Fine.", "label": "accepted"}\n{broken\n')
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(path)

    def test_missing_label_rejected_unless_prediction(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [{"id": "s1", "text": "Fine."}])
        with pytest.raises(CorpusError, match="label"):
            load_corpus(path)
        corpus = load_corpus(path, require_labels=False)
        assert corpus.documents[0].label is None

    def test_balanced_50_record_file(self, tmp_path):
        path = tmp_path / "c.jsonl"
        records = [
            {"id": f"d{i}", "text": f"Essay number {i}.",
             "label": "accepted" if i < 25 else "rejected"}
            for i in range(50)
        ]
        write_jsonl(path, records)
        corpus = load_corpus(path)
        assert corpus.class_counts() == {"accepted": 25, "rejected": 25}

    def test_round_trip(self, tmp_path):
        corpus = make_corpus(3, 2)
        path = tmp_path / "c.jsonl"
        save_corpus(corpus, path)
        again = load_corpus(path)
        assert again.ids == corpus.ids
        assert [d.label for d in again] == [d.label for d in corpus]


class TestStratifiedKfold:
    def test_balanced_50_k10_fold_sizes(self):
        corpus = make_corpus(25, 25)
        folds = stratified_kfold(corpus, 10, seed=3)
        for f in range(10):
            ids = folds.fold_ids(f)
            assert len(ids) == 5
            per_class = sum(1 for i in ids if i.startswith("a"))
            assert per_class in (2, 3)

    def test_determinism(self):
        corpus = make_corpus(25, 25)
        a = stratified_kfold(corpus, 10, seed=11)
        b = stratified_kfold(corpus, 10, seed=11)
        assert a == b
        c = stratified_kfold(corpus, 10, seed=12)
        assert a != c

    def test_k2_class_counts(self):
        corpus = make_corpus(25, 25)
        folds = stratified_kfold(corpus, 2, seed=0)
        counts = []
        for f in range(2):
            ids = folds.fold_ids(f)
            assert len(ids) == 25
            counts.append(sum(1 for i in ids if i.startswith("a")))
        assert sorted(counts) == [12, 13]

    def test_k_too_large(self):
        with pytest.raises(CorpusError, match="smallest class"):
            stratified_kfold(make_corpus(3, 25), 5, seed=0)

    def test_unlabeled_document_rejected(self):
        docs = (Document(id="x", text="Text here."),)
        with pytest.raises(CorpusError, match="unlabeled"):
            stratified_kfold(Corpus(documents=docs), 2, seed=0)

    def test_partition_invariants_randomized(self):
        rng = np.random.default_rng(7)
        for trial in range(25):
            n = int(rng.integers(10, 31))
            corpus = make_corpus(n, n)
            for k in (2, 5, 10):
                if k > n:
                    continue
                folds = stratified_kfold(corpus, k, seed=trial)
                all_ids = [i for f in range(k) for i in folds.fold_ids(f)]
                assert sorted(all_ids) == sorted(corpus.ids)  # disjoint cover
                per_class = [
                    sum(1 for i in folds.fold_ids(f) if i.startswith("a")) for f in range(k)
                ]
                assert max(per_class) - min(per_class) <= 1


class TestHoldoutSplit:
    def test_50_half_with_tune(self):
        corpus = make_corpus(25, 25)
        train, tune, test = holdout_split(corpus, 0.5, seed=1, tune_fraction=0.5)
        assert len(train) == 25
        assert 12 <= len(tune) <= 13
        assert 12 <= len(test) <= 13
        assert len(train) + len(tune) + len(test) == 50
        assert set(train.ids) | set(tune.ids) | set(test.ids) == set(corpus.ids)

    def test_50_half_no_tune(self):
        train, test = holdout_split(make_corpus(25, 25), 0.5, seed=1)
        assert (len(train), len(test)) == (25, 25)

    def test_degenerate_fraction(self):
        with pytest.raises(CorpusError, match="degenerate|empty"):
            holdout_split(make_corpus(2, 2), 0.99, seed=0)

    def test_stratified(self):
        train, test = holdout_split(make_corpus(20, 20), 0.5, seed=5)
        assert sum(1 for i in train.ids if i.startswith("a")) == 10
        assert sum(1 for i in test.ids if i.startswith("a")) == 10

    def test_deterministic(self):
        a = holdout_split(make_corpus(20, 20), 0.5, seed=9)
        b = holdout_split(make_corpus(20, 20), 0.5, seed=9)
        assert a[0].ids == b[0].ids and a[1].ids == b[1].ids


class TestBuildReference:
    def test_accepted_only(self):
        docs = (
            Document(id="A1", text="alpha beta gamma.", label=LABEL_ACCEPTED),
            Document(id="R1", text="delta epsilon zeta.", label=LABEL_REJECTED),
        )
        ref = build_reference(Corpus(documents=docs))
        assert ref.term_counts == {"alpha": 1, "beta": 1, "gamma": 1}
        assert ref.n_docs == 2  # doc frequencies still cover both classes

    def test_exclusion_removes_term_mass(self):
        docs = (
            Document(id="A1", text="alpha beta.", label=LABEL_ACCEPTED),
            Document(id="A2", text="beta gamma.", label=LABEL_ACCEPTED),
        )
        ref = build_reference(Corpus(documents=docs), exclude_ids={"A1"})
        assert ref.term_counts == {"beta": 1, "gamma": 1}
        assert "alpha" not in ref.doc_freq

    def test_all_accepted_excluded(self):
        docs = (Document(id="A1", text="alpha.", label=LABEL_ACCEPTED),)
        with pytest.raises(CorpusError, match="no accepted"):
            build_reference(Corpus(documents=docs), exclude_ids={"A1"})

    def test_leave_one_out_removes_unique_terms(self):
        docs = (
            Document(id="A1", text="shared unique1 unique1.", label=LABEL_ACCEPTED),
            Document(id="A2", text="shared other.", label=LABEL_ACCEPTED),
            Document(id="R1", text="shared noise.", label=LABEL_REJECTED),
        )
        corpus = Corpus(documents=docs)
        ref = build_reference(corpus, exclude_ids={"A1"})
        only_in_a1 = set(document_terms(docs[0].text)) - set(document_terms(docs[1].text))
        for term in only_in_a1:
            assert ref.term_counts.get(term, 0) == 0
