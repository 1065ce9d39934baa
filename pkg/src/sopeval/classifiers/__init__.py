"""From-scratch binary classifiers and their shared persistence layer."""

from .forest import ForestModel, gini, train_rfdt
from .logistic import LrModel, lr_loss_and_grad, predict_proba, train_lr
from .network import (
    NetModel,
    VARIANT_FFNN,
    VARIANT_MLP,
    init_params,
    net_loss_and_grad,
    train_net,
)
from .persistence import (
    KINDS,
    STANDARDIZED_KINDS,
    TrainedModel,
    decision_value,
    decision_values,
    label_for,
    load_model,
    predict,
    predict_labels,
    raw_decision,
    save_model,
)
from .svm import SvmModel, kernel_matrix, linear_kernel, rbf_kernel, train_svm

__all__ = [
    "ForestModel",
    "gini",
    "train_rfdt",
    "LrModel",
    "lr_loss_and_grad",
    "predict_proba",
    "train_lr",
    "NetModel",
    "VARIANT_FFNN",
    "VARIANT_MLP",
    "init_params",
    "net_loss_and_grad",
    "train_net",
    "KINDS",
    "STANDARDIZED_KINDS",
    "TrainedModel",
    "decision_value",
    "decision_values",
    "label_for",
    "load_model",
    "predict",
    "predict_labels",
    "raw_decision",
    "save_model",
    "SvmModel",
    "kernel_matrix",
    "linear_kernel",
    "rbf_kernel",
    "train_svm",
]
