"""Versioned model files and the shared predict path.

A trained model bundles the classifier payload with everything prediction
needs: standardizer parameters, the feature configuration (and its hash),
feature-name ordering, and the reference-corpus statistics behind the SE
cosine feature. Numbers are stored at full decimal precision so reloaded
models reproduce decision values bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import LABEL_ACCEPTED, LABEL_REJECTED, ReferenceCorpus
from ..errors import ModelError
from ..features import FeatureConfig, FeatureVector, Standardizer, config_hash
from . import forest, logistic, network, svm

FORMAT_TAG = "sopeval-model/1"
KINDS = ("svm", "lr", "rfdt", "mlp", "ffnn")
STANDARDIZED_KINDS = ("svm", "lr", "mlp", "ffnn")


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    classifier: object
    config: FeatureConfig
    feature_names: tuple
    standardizer: Standardizer | None = None
    reference: ReferenceCorpus | None = None
    hyperparams: dict | None = None

    @property
    def model_id(self) -> str:
        return _payload_hash(_to_payload(self))

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)


def raw_decision(kind: str, classifier, X) -> np.ndarray:
    if kind == "svm":
        return svm.decision_function(classifier, X)
    if kind == "lr":
        return logistic.decision_function(classifier, X)
    if kind == "rfdt":
        return forest.decision_function(classifier, X)
    if kind in ("mlp", "ffnn"):
        return network.decision_function(classifier, X)
    raise ModelError(f"unknown model kind {kind!r}")


def decision_values(trained: TrainedModel, matrix) -> np.ndarray:
    """Decision values for raw (unstandardized) feature rows."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if matrix.shape[1] != len(trained.feature_names):
        raise ModelError(
            f"feature dimension {matrix.shape[1]} does not match the model's "
            f"{len(trained.feature_names)} features"
        )
    if trained.standardizer is not None:
        matrix = trained.standardizer.transform(matrix)
    return raw_decision(trained.kind, trained.classifier, matrix)


def decision_value(trained: TrainedModel, vector) -> float:
    if isinstance(vector, FeatureVector):
        vector = vector.values
    return float(decision_values(trained, np.asarray(vector)[None, :])[0])


def label_for(value: float) -> str:
    """Sign rule with the documented tie-break: 0 counts as rejected."""
    return LABEL_ACCEPTED if value > 0.0 else LABEL_REJECTED


def predict(trained: TrainedModel, vector) -> str:
    return label_for(decision_value(trained, vector))


def predict_labels(trained: TrainedModel, matrix) -> list:
    return [label_for(float(v)) for v in decision_values(trained, matrix)]


# ---------------------------------------------------------------------------
# Serialization


def _floats(arr) -> list:
    return [float(v) for v in np.asarray(arr, dtype=np.float64).ravel()]


def _matrix(arr) -> list:
    return [[float(v) for v in row] for row in np.asarray(arr, dtype=np.float64)]


def _tree_to_dict(node: forest.TreeNode) -> dict:
    if node.is_leaf:
        return {"p": int(node.prediction)}
    return {
        "f": int(node.feature),
        "t": float(node.threshold),
        "l": _tree_to_dict(node.left),
        "r": _tree_to_dict(node.right),
    }


def _tree_from_dict(payload: dict) -> forest.TreeNode:
    if "p" in payload:
        return forest.TreeNode(prediction=int(payload["p"]))
    return forest.TreeNode(
        feature=int(payload["f"]),
        threshold=float(payload["t"]),
        left=_tree_from_dict(payload["l"]),
        right=_tree_from_dict(payload["r"]),
    )


def _classifier_payload(kind: str, clf) -> dict:
    if kind == "svm":
        return {
            "kernel": clf.kernel,
            "gamma": None if clf.gamma is None else float(clf.gamma),
            "C": float(clf.C),
            "support_vectors": _matrix(clf.support_vectors),
            "dual_coef": _floats(clf.dual_coef),
            "alphas": _floats(clf.alphas),
            "support_labels": _floats(clf.support_labels),
            "bias": float(clf.bias),
            "converged": bool(clf.converged),
            "n_passes": int(clf.n_passes),
        }
    if kind == "lr":
        return {
            "weights": _floats(clf.weights),
            "bias": float(clf.bias),
            "l2": float(clf.l2),
            "converged": bool(clf.converged),
            "grad_norm": float(clf.grad_norm),
            "n_iters": int(clf.n_iters),
        }
    if kind == "rfdt":
        return {
            "trees": [_tree_to_dict(t) for t in clf.trees],
            "tree_seeds": [int(s) for s in clf.tree_seeds],
            "n_features": int(clf.n_features),
            "max_depth": None if clf.max_depth is None else int(clf.max_depth),
            "features_per_split": int(clf.features_per_split),
        }
    if kind in ("mlp", "ffnn"):
        return {
            "layer_sizes": [int(s) for s in clf.layer_sizes],
            "weights": [_matrix(W) for W in clf.weights],
            "biases": [_floats(c) for c in clf.biases],
            "activation": clf.activation,
            "variant": clf.variant,
            "best_epoch": int(clf.best_epoch),
            "epochs_run": int(clf.epochs_run),
            "final_train_loss": float(clf.final_train_loss),
        }
    raise ModelError(f"unknown model kind {kind!r}")


def _classifier_from_payload(kind: str, payload: dict):
    if kind == "svm":
        return svm.SvmModel(
            kernel=payload["kernel"],
            gamma=payload["gamma"],
            C=payload["C"],
            support_vectors=np.array(payload["support_vectors"], dtype=np.float64).reshape(
                len(payload["support_vectors"]), -1
            ),
            dual_coef=np.array(payload["dual_coef"], dtype=np.float64),
            alphas=np.array(payload["alphas"], dtype=np.float64),
            support_labels=np.array(payload["support_labels"], dtype=np.float64),
            bias=payload["bias"],
            converged=payload["converged"],
            n_passes=payload["n_passes"],
        )
    if kind == "lr":
        return logistic.LrModel(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=payload["bias"],
            l2=payload["l2"],
            converged=payload["converged"],
            grad_norm=payload["grad_norm"],
            n_iters=payload["n_iters"],
        )
    if kind == "rfdt":
        return forest.ForestModel(
            trees=tuple(_tree_from_dict(t) for t in payload["trees"]),
            tree_seeds=tuple(payload["tree_seeds"]),
            n_features=payload["n_features"],
            max_depth=payload["max_depth"],
            features_per_split=payload["features_per_split"],
        )
    if kind in ("mlp", "ffnn"):
        return network.NetModel(
            layer_sizes=tuple(payload["layer_sizes"]),
            weights=tuple(np.array(W, dtype=np.float64) for W in payload["weights"]),
            biases=tuple(np.array(c, dtype=np.float64) for c in payload["biases"]),
            activation=payload["activation"],
            variant=payload["variant"],
            best_epoch=payload["best_epoch"],
            epochs_run=payload["epochs_run"],
            final_train_loss=payload["final_train_loss"],
        )
    raise ModelError(f"unknown model kind {kind!r}")


def _to_payload(trained: TrainedModel) -> dict:
    reference = None
    if trained.reference is not None:
        reference = {
            "term_counts": dict(trained.reference.term_counts),
            "doc_freq": dict(trained.reference.doc_freq),
            "n_docs": trained.reference.n_docs,
            "excluded_ids": sorted(trained.reference.excluded_ids),
        }
    standardizer = None
    if trained.standardizer is not None:
        standardizer = {
            "mean": _floats(trained.standardizer.mean),
            "std": _floats(trained.standardizer.std),
        }
    return {
        "format": FORMAT_TAG,
        "kind": trained.kind,
        "hyperparams": trained.hyperparams or {},
        "feature_config": json.loads(trained.config.canonical_json()),
        "feature_config_hash": config_hash(trained.config),
        "feature_names": list(trained.feature_names),
        "standardizer": standardizer,
        "reference": reference,
        "classifier": _classifier_payload(trained.kind, trained.classifier),
    }


def _payload_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def save_model(trained: TrainedModel, path: str | Path) -> None:
    payload = _to_payload(trained)
    payload["model_id"] = _payload_hash(payload)
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"truncated or corrupt model file {path}: {exc.msg}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_TAG:
        raise ModelError(
            f"unsupported model file version {payload.get('format')!r} (expected {FORMAT_TAG})"
        )
    stored_id = payload.pop("model_id", None)
    if stored_id != _payload_hash(payload):
        raise ModelError(f"model file {path} failed its integrity check")

    kind = payload["kind"]
    if kind not in KINDS:
        raise ModelError(f"unknown model kind {kind!r}")
    config = FeatureConfig.from_dict(payload["feature_config"])
    standardizer = None
    if payload["standardizer"] is not None:
        standardizer = Standardizer(
            mean=np.array(payload["standardizer"]["mean"], dtype=np.float64),
            std=np.array(payload["standardizer"]["std"], dtype=np.float64),
        )
    reference = None
    if payload["reference"] is not None:
        reference = ReferenceCorpus(
            term_counts=payload["reference"]["term_counts"],
            doc_freq=payload["reference"]["doc_freq"],
            n_docs=payload["reference"]["n_docs"],
            excluded_ids=frozenset(payload["reference"]["excluded_ids"]),
        )
    return TrainedModel(
        kind=kind,
        classifier=_classifier_from_payload(kind, payload["classifier"]),
        config=config,
        feature_names=tuple(payload["feature_names"]),
        standardizer=standardizer,
        reference=reference,
        hyperparams=payload["hyperparams"],
    )
