"""Feed-forward networks for the two neural variants: a multilayer perceptron
trained to the final epoch (mlp_split) and a tuned network that early-stops on
a held-out tuning set (ffnn_tuned). Full-batch gradient descent on the mean
logistic loss; with no hidden layers the update rule coincides exactly with
unregularized logistic regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from .logistic import _sigmoid

VARIANT_MLP = "mlp_split"
VARIANT_FFNN = "ffnn_tuned"

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "sigmoid": (_sigmoid, lambda z: _sigmoid(z) * (1.0 - _sigmoid(z))),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0.0).astype(np.float64)),
}


@dataclass(frozen=True)
class NetModel:
    layer_sizes: tuple  # (input, hidden..., 1)
    weights: tuple  # W_l with shape (n_in, n_out)
    biases: tuple
    activation: str
    variant: str
    best_epoch: int
    epochs_run: int
    final_train_loss: float


def init_params(layer_sizes, seed: int):
    """Scaled-normal weights, zero biases; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes, layer_sizes[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return weights, biases


def forward_logits(weights, biases, X: np.ndarray, activation: str) -> np.ndarray:
    act, _ = _ACTIVATIONS[activation]
    a = X
    last = len(weights) - 1
    for l, (W, c) in enumerate(zip(weights, biases)):
        z = a @ W + c
        a = z if l == last else act(z)
    return a[:, 0]


def net_loss_and_grad(weights, biases, X: np.ndarray, y: np.ndarray, activation: str):
    """Mean logistic loss on +/-1 labels and its backpropagated gradients.
    Exposed for finite-difference verification."""
    act, act_prime = _ACTIVATIONS[activation]
    last = len(weights) - 1
    a = X
    pre = []  # z per layer
    post = [X]  # activations per layer, input first
    for l, (W, c) in enumerate(zip(weights, biases)):
        z = a @ W + c
        pre.append(z)
        a = z if l == last else act(z)
        post.append(a)

    logits = post[-1][:, 0]
    margins = y * logits
    loss = float(np.mean(np.logaddexp(0.0, -margins)))

    n = len(X)
    delta = (-y * _sigmoid(-margins) / n)[:, None]  # dL/dlogit
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    for l in range(last, -1, -1):
        grads_w[l] = post[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ weights[l].T) * act_prime(pre[l - 1])
    return loss, grads_w, grads_b


def _validate(X, y, name):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(y) != len(X):
        raise ModelError(f"{name} data must be a 2-d matrix with one label per row")
    if not np.all(np.isfinite(X)):
        raise ModelError(f"{name} features contain non-finite values")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ModelError("labels must be +1/-1")
    return X, y


def train_net(
    X,
    y,
    X_tune=None,
    y_tune=None,
    hidden_sizes=(32,),
    activation: str = "tanh",
    learning_rate: float = 0.01,
    epochs: int = 500,
    patience: int = 25,
    seed: int = 0,
    variant: str = VARIANT_MLP,
) -> NetModel:
    X, y = _validate(X, y, "training")
    if len(set(np.unique(y))) < 2:
        raise ModelError("training data contains a single class")
    if activation not in _ACTIVATIONS:
        raise ModelError(f"unknown activation {activation!r}")
    if variant not in (VARIANT_MLP, VARIANT_FFNN):
        raise ModelError(f"unknown network variant {variant!r}")
    if variant == VARIANT_FFNN:
        if X_tune is None or y_tune is None or len(np.atleast_2d(X_tune)) == 0:
            raise ModelError("ffnn_tuned requires a non-empty tuning set")
        X_tune, y_tune = _validate(X_tune, y_tune, "tuning")

    layer_sizes = (X.shape[1],) + tuple(int(h) for h in hidden_sizes) + (1,)
    weights, biases = init_params(layer_sizes, seed)

    best_loss = np.inf
    best_epoch = 0
    best_params = None
    train_loss = np.inf
    epochs_run = 0
    for epoch in range(1, epochs + 1):
        epochs_run = epoch
        train_loss, grads_w, grads_b = net_loss_and_grad(weights, biases, X, y, activation)
        weights = [W - learning_rate * g for W, g in zip(weights, grads_w)]
        biases = [c - learning_rate * g for c, g in zip(biases, grads_b)]

        if variant == VARIANT_FFNN:
            tune_logits = forward_logits(weights, biases, X_tune, activation)
            tune_loss = float(np.mean(np.logaddexp(0.0, -y_tune * tune_logits)))
            if tune_loss < best_loss:
                best_loss = tune_loss
                best_epoch = epoch
                best_params = ([W.copy() for W in weights], [c.copy() for c in biases])
            elif epoch - best_epoch >= patience:
                break

    if variant == VARIANT_FFNN and best_params is not None:
        weights, biases = best_params
    else:
        best_epoch = epochs_run

    return NetModel(
        layer_sizes=layer_sizes,
        weights=tuple(weights),
        biases=tuple(biases),
        activation=activation,
        variant=variant,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        final_train_loss=train_loss,
    )


def decision_function(model: NetModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.layer_sizes[0]:
        raise ModelError(
            f"feature dimension {X.shape[1]} does not match model dimension {model.layer_sizes[0]}"
        )
    return forward_logits(list(model.weights), list(model.biases), X, model.activation)
