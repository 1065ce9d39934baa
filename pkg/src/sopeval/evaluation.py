"""Confusion-matrix metrics, stratified cross-validation with a per-fold
leakage audit, the multi-fold ablation grid, and report rendering."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping

import numpy as np

from . import features as fp
from .classifiers import (
    STANDARDIZED_KINDS,
    TrainedModel,
    label_for,
    raw_decision,
)
from .classifiers import forest, logistic, network, svm  # noqa: F401  (kind dispatch)
from .corpus import (
    Corpus,
    LABEL_ACCEPTED,
    build_reference,
    holdout_split,
    stratified_kfold,
)
from .errors import EvaluationError

ABLATION_ROWS = (
    ("T", ("T",)),
    ("WE", ("WE",)),
    ("SE", ("SE",)),
    ("T + WE", ("T", "WE")),
    ("T + SE", ("T", "SE")),
    ("SE + WE", ("WE", "SE")),
    ("T + WE + SE", ("T", "WE", "SE")),
)
ABLATION_COLUMNS = ("2-F", "5-F", "10-F", "50% Split")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with accepted as the positive class."""

    tp_acc: int
    fn_acc: int
    fp_acc: int
    tn_acc: int

    @property
    def total(self) -> int:
        return self.tp_acc + self.fn_acc + self.fp_acc + self.tn_acc

    @classmethod
    def from_pairs(cls, gold, predicted) -> "ConfusionMatrix":
        tp = fn = fpos = tn = 0
        for g, p in zip(gold, predicted):
            if g == LABEL_ACCEPTED:
                if p == LABEL_ACCEPTED:
                    tp += 1
                else:
                    fn += 1
            else:
                if p == LABEL_ACCEPTED:
                    fpos += 1
                else:
                    tn += 1
        return cls(tp_acc=tp, fn_acc=fn, fp_acc=fpos, tn_acc=tn)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp_acc + other.tp_acc,
            self.fn_acc + other.fn_acc,
            self.fp_acc + other.fp_acc,
            self.tn_acc + other.tn_acc,
        )


@dataclass(frozen=True)
class FoldReport:
    """Everything needed to audit one fold from the outside."""

    index: int
    train_ids: tuple
    test_ids: tuple
    cm: ConfusionMatrix
    classifier_seed: int
    predictions: tuple  # (doc id, gold, predicted)
    standardizer_mean: tuple | None = None
    standardizer_std: tuple | None = None
    reference_term_counts: Mapping | None = None
    reference_doc_freq: Mapping | None = None
    reference_n_docs: int | None = None


@dataclass(frozen=True)
class MetricsReport:
    classifier: str
    cm: ConfusionMatrix
    p_acc: float
    r_acc: float
    f_acc: float
    p_rej: float
    r_rej: float
    f_rej: float
    macro_p: float
    macro_r: float
    macro_f: float
    accuracy: float
    warnings: tuple = ()
    folds: tuple = ()
    fold_averaged: Mapping | None = None
    config_hash: str = ""
    seed: int | None = None
    scheme: str = ""
    aggregate: str = "pooled"


def _safe_div(num: int, den: int, warning: str, warnings: list) -> float:
    if den == 0:
        warnings.append(warning)
        return 0.0
    return num / den


def metrics(
    cm: ConfusionMatrix,
    classifier: str = "",
    config_hash: str = "",
    seed: int | None = None,
    folds: tuple = (),
    scheme: str = "",
    aggregate: str = "pooled",
) -> MetricsReport:
    """Per-class precision/recall/F1, unweighted macro averages, accuracy.
    Zero-denominator metrics are defined as 0 and flagged in warnings."""
    if cm.total == 0:
        raise EvaluationError("cannot compute metrics on an empty confusion matrix")
    warnings: list[str] = []
    p_acc = _safe_div(cm.tp_acc, cm.tp_acc + cm.fp_acc, "no documents predicted accepted; P_acc := 0", warnings)
    r_acc = _safe_div(cm.tp_acc, cm.tp_acc + cm.fn_acc, "no gold-accepted documents; R_acc := 0", warnings)
    p_rej = _safe_div(cm.tn_acc, cm.tn_acc + cm.fn_acc, "no documents predicted rejected; P_rej := 0", warnings)
    r_rej = _safe_div(cm.tn_acc, cm.tn_acc + cm.fp_acc, "no gold-rejected documents; R_rej := 0", warnings)
    f_acc = 2 * p_acc * r_acc / (p_acc + r_acc) if p_acc + r_acc > 0 else 0.0
    f_rej = 2 * p_rej * r_rej / (p_rej + r_rej) if p_rej + r_rej > 0 else 0.0

    fold_averaged = None
    if folds:
        sub = [metrics(f.cm, classifier=classifier) for f in folds if f.cm.total > 0]
        if sub:
            fold_averaged = {
                "macro_p": float(np.mean([s.macro_p for s in sub])),
                "macro_r": float(np.mean([s.macro_r for s in sub])),
                "macro_f": float(np.mean([s.macro_f for s in sub])),
                "accuracy": float(np.mean([s.accuracy for s in sub])),
            }

    return MetricsReport(
        classifier=classifier,
        cm=cm,
        p_acc=p_acc,
        r_acc=r_acc,
        f_acc=f_acc,
        p_rej=p_rej,
        r_rej=r_rej,
        f_rej=f_rej,
        macro_p=(p_acc + p_rej) / 2,
        macro_r=(r_acc + r_rej) / 2,
        macro_f=(f_acc + f_rej) / 2,
        accuracy=(cm.tp_acc + cm.tn_acc) / cm.total,
        warnings=tuple(warnings),
        folds=folds,
        fold_averaged=fold_averaged,
        config_hash=config_hash,
        seed=seed,
        scheme=scheme,
        aggregate=aggregate,
    )


# ---------------------------------------------------------------------------
# Training dispatch


@dataclass(frozen=True)
class ClassifierSpec:
    """Classifier kind plus hyperparameters. The spec's own seed feeds the
    classifier; fold membership is controlled solely by the evaluation seed."""

    kind: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0


def _derived_seed(spec_seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([spec_seed, fold]).generate_state(1)[0])


def _train_classifier(spec: ClassifierSpec, X, y, X_tune=None, y_tune=None, seed: int = 0):
    params = dict(spec.params)
    params.pop("tune_fraction", None)
    if spec.kind == "svm":
        return svm.train_svm(X, y, seed=seed, **params)
    if spec.kind == "lr":
        return logistic.train_lr(X, y, **params)
    if spec.kind == "rfdt":
        return forest.train_rfdt(X, y, seed=seed, **params)
    if spec.kind == "mlp":
        return network.train_net(X, y, seed=seed, variant=network.VARIANT_MLP, **params)
    if spec.kind == "ffnn":
        return network.train_net(
            X, y, X_tune, y_tune, seed=seed, variant=network.VARIANT_FFNN, **params
        )
    raise EvaluationError(f"unknown classifier kind {spec.kind!r}")


def _labels_pm1(corpus: Corpus) -> np.ndarray:
    return np.array([1.0 if d.label == LABEL_ACCEPTED else -1.0 for d in corpus])


def _audit_fold(
    fold: int,
    train_corpus: Corpus,
    config: fp.FeatureConfig,
    resources: fp.PipelineResources,
    compat_corpus: Corpus | None,
    X_train: np.ndarray,
    standardizer: fp.Standardizer | None,
    reference,
) -> None:
    """Leakage audit: a fresh featurizer over the training partition alone
    must reproduce the matrix, standardizer, and reference bit-exactly."""
    fresh = fp.Featurizer(config, resources)
    _, X_re, ref_re = fp.training_matrix(train_corpus, fresh, compat_corpus)
    ok = np.array_equal(X_re, X_train)
    if ok and standardizer is not None:
        std_re = fp.fit_standardizer(X_re)
        ok = np.array_equal(std_re.mean, standardizer.mean) and np.array_equal(
            std_re.std, standardizer.std
        )
    if ok and (reference is None) != (ref_re is None):
        ok = False
    if ok and reference is not None:
        ok = (
            dict(ref_re.term_counts) == dict(reference.term_counts)
            and dict(ref_re.doc_freq) == dict(reference.doc_freq)
            and ref_re.n_docs == reference.n_docs
        )
    if not ok:
        raise EvaluationError(
            f"no-leakage audit failed on fold {fold}: pipeline state is not a pure "
            "function of the training partition"
        )


def _fit_and_score(
    fold: int,
    train_corpus: Corpus,
    test_corpus: Corpus,
    tune_corpus: Corpus | None,
    config: fp.FeatureConfig,
    spec: ClassifierSpec,
    featurizer: fp.Featurizer,
    resources: fp.PipelineResources,
    compat_corpus: Corpus | None,
) -> FoldReport:
    """Shared per-fold pipeline: features, standardizer, model, predictions.
    The reference and standardizer are functions of the training rows only;
    tune rows (ffnn early stopping) are carved from inside the training
    partition unless an explicit tune corpus is provided."""
    try:
        classifier_seed = _derived_seed(spec.seed, fold)
        _, X_train, full_ref = fp.training_matrix(train_corpus, featurizer, compat_corpus)
        y_train = _labels_pm1(train_corpus)

        standardizer = None
        X_fit = X_train
        if spec.kind in STANDARDIZED_KINDS:
            standardizer = fp.fit_standardizer(X_train)
            X_fit = standardizer.transform(X_train)

        X_tune = y_tune = None
        fit_corpus = train_corpus
        X_core = X_fit
        y_core = y_train
        if spec.kind == "ffnn":
            if tune_corpus is None:
                tune_fraction = float(spec.params.get("tune_fraction", 0.25))
                fit_corpus, tune_corpus = holdout_split(
                    train_corpus, 1.0 - tune_fraction, seed=classifier_seed
                )
                row_of = {doc_id: i for i, doc_id in enumerate(train_corpus.ids)}
                core_rows = [row_of[i] for i in fit_corpus.ids]
                tune_rows = [row_of[i] for i in tune_corpus.ids]
                X_core, y_core = X_fit[core_rows], y_train[core_rows]
                X_tune, y_tune = X_fit[tune_rows], y_train[tune_rows]
            else:
                _, X_tune_raw = fp.evaluation_matrix(
                    tune_corpus, featurizer, full_ref, compat_corpus
                )
                X_tune = standardizer.transform(X_tune_raw) if standardizer else X_tune_raw
                y_tune = _labels_pm1(tune_corpus)

        clf = _train_classifier(spec, X_core, y_core, X_tune, y_tune, seed=classifier_seed)

        _, X_test = fp.evaluation_matrix(test_corpus, featurizer, full_ref, compat_corpus)
        X_test_in = standardizer.transform(X_test) if standardizer else X_test
        values = raw_decision(spec.kind, clf, X_test_in)
        predicted = [label_for(float(v)) for v in values]
        gold = [d.label for d in test_corpus]

        _audit_fold(
            fold, train_corpus, config, resources, compat_corpus, X_train, standardizer, full_ref
        )
    except EvaluationError:
        raise
    except Exception as exc:
        raise EvaluationError(f"fold {fold}: {exc}") from exc

    return FoldReport(
        index=fold,
        train_ids=train_corpus.ids,
        test_ids=test_corpus.ids,
        cm=ConfusionMatrix.from_pairs(gold, predicted),
        classifier_seed=classifier_seed,
        predictions=tuple(zip(test_corpus.ids, gold, predicted)),
        standardizer_mean=tuple(float(v) for v in standardizer.mean) if standardizer else None,
        standardizer_std=tuple(float(v) for v in standardizer.std) if standardizer else None,
        reference_term_counts=dict(full_ref.term_counts) if full_ref else None,
        reference_doc_freq=dict(full_ref.doc_freq) if full_ref else None,
        reference_n_docs=full_ref.n_docs if full_ref else None,
    )


def cross_validate(
    corpus: Corpus,
    config: fp.FeatureConfig,
    spec: ClassifierSpec,
    k: int,
    seed: int,
    resources: fp.PipelineResources,
    aggregate: str = "pooled",
    compat_reference: bool = False,
) -> MetricsReport:
    """Stratified k-fold evaluation with a pooled confusion matrix. Every
    fold fits the reference corpus, standardizer, and model on its training
    folds only (asserted by the per-fold audit); compat_reference reproduces
    the source method's full-dataset reference instead."""
    corpus.require_labels()
    assignment = stratified_kfold(corpus, k, seed)
    featurizer = fp.Featurizer(config, resources)
    compat_corpus = corpus if compat_reference else None

    fold_reports = []
    pooled = ConfusionMatrix(0, 0, 0, 0)
    for fold in range(k):
        train_ids, test_ids = assignment.split(fold)
        report = _fit_and_score(
            fold,
            corpus.subset(train_ids),
            corpus.subset(test_ids),
            None,
            config,
            spec,
            featurizer,
            resources,
            compat_corpus,
        )
        fold_reports.append(report)
        pooled = pooled + report.cm

    if pooled.total != len(corpus):
        raise EvaluationError(
            f"pooled confusion total {pooled.total} != corpus size {len(corpus)}"
        )
    return metrics(
        pooled,
        classifier=spec.kind,
        config_hash=fp.config_hash(config),
        seed=seed,
        folds=tuple(fold_reports),
        scheme=f"{k}-fold cv",
        aggregate=aggregate,
    )


def evaluate_split(
    corpus: Corpus,
    config: fp.FeatureConfig,
    spec: ClassifierSpec,
    seed: int,
    resources: fp.PipelineResources,
    train_fraction: float = 0.5,
    tune_fraction: float | None = None,
    aggregate: str = "pooled",
    compat_reference: bool = False,
) -> MetricsReport:
    """Single stratified holdout. For the tuned network variant the non-train
    part is split into tuning and testing (both unseen by the reference and
    standardizer, which come from the train part alone)."""
    corpus.require_labels()
    featurizer = fp.Featurizer(config, resources)
    compat_corpus = corpus if compat_reference else None

    tune_corpus = None
    if spec.kind == "ffnn":
        tf = tune_fraction if tune_fraction is not None else 0.5
        train_corpus, tune_corpus, test_corpus = holdout_split(
            corpus, train_fraction, seed, tune_fraction=tf
        )
    else:
        train_corpus, test_corpus = holdout_split(corpus, train_fraction, seed)

    report = _fit_and_score(
        0,
        train_corpus,
        test_corpus,
        tune_corpus,
        config,
        spec,
        featurizer,
        resources,
        compat_corpus,
    )
    scheme = f"{int(round(train_fraction * 100))}% split"
    return metrics(
        report.cm,
        classifier=spec.kind,
        config_hash=fp.config_hash(config),
        seed=seed,
        folds=(report,),
        scheme=scheme,
        aggregate=aggregate,
    )


def train_model(
    corpus: Corpus,
    config: fp.FeatureConfig,
    spec: ClassifierSpec,
    resources: fp.PipelineResources,
    compat_reference: bool = False,
) -> TrainedModel:
    """Fit one deployable model on a whole labeled corpus. The shipped
    reference corpus covers the full training data; accepted documents are
    still left out of their own reference rows during fitting."""
    corpus.require_labels()
    featurizer = fp.Featurizer(config, resources)
    compat_corpus = corpus if compat_reference else None
    _, X_train, full_ref = fp.training_matrix(corpus, featurizer, compat_corpus)
    y_train = _labels_pm1(corpus)

    standardizer = None
    X_fit = X_train
    if spec.kind in STANDARDIZED_KINDS:
        standardizer = fp.fit_standardizer(X_train)
        X_fit = standardizer.transform(X_train)

    classifier_seed = _derived_seed(spec.seed, 0)
    X_tune = y_tune = None
    X_core, y_core = X_fit, y_train
    if spec.kind == "ffnn":
        tune_fraction = float(spec.params.get("tune_fraction", 0.25))
        core_corpus, tune_corpus = holdout_split(
            corpus, 1.0 - tune_fraction, seed=classifier_seed
        )
        row_of = {doc_id: i for i, doc_id in enumerate(corpus.ids)}
        core_rows = [row_of[i] for i in core_corpus.ids]
        tune_rows = [row_of[i] for i in tune_corpus.ids]
        X_core, y_core = X_fit[core_rows], y_train[core_rows]
        X_tune, y_tune = X_fit[tune_rows], y_train[tune_rows]

    clf = _train_classifier(spec, X_core, y_core, X_tune, y_tune, seed=classifier_seed)
    hyperparams = {"kind": spec.kind, "seed": spec.seed, **dict(spec.params)}
    return TrainedModel(
        kind=spec.kind,
        classifier=clf,
        config=config,
        feature_names=featurizer.names,
        standardizer=standardizer,
        reference=full_ref,
        hyperparams=hyperparams,
    )


# ---------------------------------------------------------------------------
# Ablation


@dataclass(frozen=True)
class AblationGrid:
    row_labels: tuple
    row_sets: tuple
    columns: tuple
    accuracy: tuple  # 7x4 unrounded fractions
    reports: tuple  # 7x4 MetricsReport
    winner: str
    classifier: str
    seed: int
    base_config_hash: str


def ablate(
    corpus: Corpus,
    base_config: fp.FeatureConfig,
    spec: ClassifierSpec,
    seed: int,
    resources: fp.PipelineResources,
    compat_reference: bool = False,
) -> AblationGrid:
    """All seven feature-set combinations evaluated under 2/5/10-fold CV and
    a 50% stratified holdout, with identical seeds in every cell."""
    accuracy_rows = []
    report_rows = []
    for _, sets in ABLATION_ROWS:
        row_config = replace(base_config, enabled_sets=sets)
        row_acc = []
        row_reports = []
        for k in (2, 5, 10):
            rep = cross_validate(
                corpus, row_config, spec, k, seed, resources, compat_reference=compat_reference
            )
            row_acc.append(rep.accuracy)
            row_reports.append(rep)
        rep = evaluate_split(
            corpus,
            row_config,
            spec,
            seed,
            resources,
            train_fraction=0.5,
            compat_reference=compat_reference,
        )
        row_acc.append(rep.accuracy)
        row_reports.append(rep)
        accuracy_rows.append(tuple(row_acc))
        report_rows.append(tuple(row_reports))

    means = [float(np.mean(row)) for row in accuracy_rows]
    winner = ABLATION_ROWS[int(np.argmax(means))][0]
    return AblationGrid(
        row_labels=tuple(label for label, _ in ABLATION_ROWS),
        row_sets=tuple(sets for _, sets in ABLATION_ROWS),
        columns=ABLATION_COLUMNS,
        accuracy=tuple(accuracy_rows),
        reports=tuple(report_rows),
        winner=winner,
        classifier=spec.kind,
        seed=seed,
        base_config_hash=fp.config_hash(base_config),
    )


# ---------------------------------------------------------------------------
# Rendering


def half_up(value: float, places: int) -> str:
    """Display rounding, half away from zero, applied to the shortest repr."""
    quantum = Decimal(1).scaleb(-places)
    out = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    return f"{out:.{places}f}" if places > 0 else str(int(out))


def _display_macro(a: float, b: float) -> str:
    """Macro cells display the mean of the two displayed class cells, so the
    rendered table stays internally consistent at 2 decimals."""
    qa = Decimal(half_up(a, 2))
    qb = Decimal(half_up(b, 2))
    mean = (qa + qb) / 2
    return f"{mean.quantize(Decimal('0.01'), rounding=ROUND_HALF_UP):.2f}"


_METRIC_COLUMNS = ("P_acc", "P_rej", "P_avg", "R_acc", "R_rej", "R_avg", "F_acc", "F_rej", "F_avg")


def display_cells(report: MetricsReport) -> dict:
    """The nine Table-style cells as display strings."""
    return {
        "P_acc": half_up(report.p_acc, 2),
        "P_rej": half_up(report.p_rej, 2),
        "P_avg": _display_macro(report.p_acc, report.p_rej),
        "R_acc": half_up(report.r_acc, 2),
        "R_rej": half_up(report.r_rej, 2),
        "R_avg": _display_macro(report.r_acc, report.r_rej),
        "F_acc": half_up(report.f_acc, 2),
        "F_rej": half_up(report.f_rej, 2),
        "F_avg": _display_macro(report.f_acc, report.f_rej),
    }


def render_metrics_text(report: MetricsReport) -> str:
    cells = display_cells(report)
    header = f"{'classifier':<14}" + "".join(f"{c:>7}" for c in _METRIC_COLUMNS)
    row = f"{report.classifier:<14}" + "".join(f"{cells[c]:>7}" for c in _METRIC_COLUMNS)
    lines = [header, row, ""]
    lines.append(f"accuracy: {half_up(report.accuracy, 2)}    documents: {report.cm.total}")
    if report.fold_averaged and report.aggregate == "fold_mean":
        lines.append(
            "fold-averaged macro F: "
            f"{half_up(report.fold_averaged['macro_f'], 2)}    "
            f"accuracy: {half_up(report.fold_averaged['accuracy'], 2)}"
        )
    lines.append(f"scheme: {report.scheme}    aggregate: {report.aggregate}")
    lines.append(f"config: {report.config_hash}    seed: {report.seed}")
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"


_DELIMITED_FIELDS = (
    "p_acc", "r_acc", "f_acc", "p_rej", "r_rej", "f_rej",
    "macro_p", "macro_r", "macro_f", "accuracy",
)


def render_metrics_delimited(report: MetricsReport) -> str:
    lines = [
        f"classifier\t{report.classifier}",
        f"tp_acc\t{report.cm.tp_acc}",
        f"fn_acc\t{report.cm.fn_acc}",
        f"fp_acc\t{report.cm.fp_acc}",
        f"tn_acc\t{report.cm.tn_acc}",
    ]
    for name in _DELIMITED_FIELDS:
        lines.append(f"{name}\t{repr(getattr(report, name))}")
    lines.append(f"scheme\t{report.scheme}")
    lines.append(f"aggregate\t{report.aggregate}")
    lines.append(f"config_hash\t{report.config_hash}")
    lines.append(f"seed\t{report.seed}")
    return "\n".join(lines) + "\n"


def parse_metrics_delimited(text: str) -> dict:
    out: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("\t")
        if key in ("classifier", "scheme", "aggregate", "config_hash"):
            out[key] = value
        elif key in ("tp_acc", "fn_acc", "fp_acc", "tn_acc", "seed"):
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out


def render_grid_text(grid: AblationGrid) -> str:
    label_width = max(len(label) for label in grid.row_labels) + 2
    header = f"{'features':<{label_width}}" + "".join(f"{c:>11}" for c in grid.columns)
    lines = ["ablation accuracy (percent)", header]
    for label, row in zip(grid.row_labels, grid.accuracy):
        cells = "".join(f"{half_up(v * 100, 0):>11}" for v in row)
        lines.append(f"{label:<{label_width}}" + cells)
    lines.append("")
    lines.append(f"winner: {grid.winner}")
    lines.append(
        f"classifier: {grid.classifier}    seed: {grid.seed}    "
        f"base config: {grid.base_config_hash}"
    )
    return "\n".join(lines) + "\n"


def render_grid_delimited(grid: AblationGrid) -> str:
    lines = ["features\t" + "\t".join(grid.columns)]
    for label, row in zip(grid.row_labels, grid.accuracy):
        lines.append(label + "\t" + "\t".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_grid_delimited(text: str) -> dict:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    columns = tuple(lines[0].split("\t")[1:])
    rows = {}
    for line in lines[1:]:
        parts = line.split("\t")
        rows[parts[0]] = tuple(float(v) for v in parts[1:])
    return {"columns": columns, "rows": rows}
