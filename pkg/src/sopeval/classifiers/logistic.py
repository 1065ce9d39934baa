"""L2-regularized logistic regression on +/-1 labels, trained by full-batch
gradient descent from a zero start. Deterministic: no randomness anywhere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError


@dataclass(frozen=True)
class LrModel:
    weights: np.ndarray
    bias: float
    l2: float
    converged: bool
    grad_norm: float
    n_iters: int


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lr_loss_and_grad(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean logistic loss over rows plus (l2/2)*||w||^2, with its gradient.
    Exposed so finite-difference checks can probe arbitrary points."""
    margins = y * (X @ weights + bias)
    loss = float(np.mean(np.logaddexp(0.0, -margins)) + 0.5 * l2 * np.dot(weights, weights))
    # d/dmargin log(1+e^{-m}) = -sigmoid(-m)
    coeff = -y * _sigmoid(-margins) / len(X)
    grad_w = X.T @ coeff + l2 * weights
    grad_b = float(np.sum(coeff))
    return loss, grad_w, grad_b


def _validate(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(y) != len(X):
        raise ModelError("training data must be a 2-d matrix with one label per row")
    if not np.all(np.isfinite(X)):
        raise ModelError("training features contain non-finite values")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ModelError("labels must be +1/-1")
    if len(set(np.unique(y))) < 2:
        raise ModelError("training data contains a single class")
    return X, y


def train_lr(
    X,
    y,
    l2: float = 1e-4,
    learning_rate: float = 0.1,
    max_iters: int = 5000,
    tol: float = 1e-6,
) -> LrModel:
    """Descend until the gradient norm is within tol or max_iters is reached;
    the model records which happened."""
    X, y = _validate(X, y)
    weights = np.zeros(X.shape[1])
    bias = 0.0
    grad_norm = np.inf
    iters = 0
    for iters in range(1, max_iters + 1):
        _, grad_w, grad_b = lr_loss_and_grad(weights, bias, X, y, l2)
        grad_norm = float(np.sqrt(np.dot(grad_w, grad_w) + grad_b * grad_b))
        if grad_norm <= tol:
            break
        weights = weights - learning_rate * grad_w
        bias = bias - learning_rate * grad_b
    return LrModel(
        weights=weights,
        bias=bias,
        l2=l2,
        converged=grad_norm <= tol,
        grad_norm=grad_norm,
        n_iters=iters,
    )


def decision_function(model: LrModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.weights.shape[0]:
        raise ModelError(
            f"feature dimension {X.shape[1]} does not match model dimension {model.weights.shape[0]}"
        )
    return X @ model.weights + model.bias


def predict_proba(model: LrModel, X) -> np.ndarray:
    """P(accepted) via the sigmoid of the decision value."""
    return _sigmoid(decision_function(model, X))
