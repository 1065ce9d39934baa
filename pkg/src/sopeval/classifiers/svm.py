"""Binary SVM trained by sequential minimal optimization (SMO).

Platt-style pair selection: examine-all sweeps alternate with non-bound
sweeps; the partner coefficient is chosen by the largest error gap first,
then by seeded random scans. Training ends only after an examine-all sweep
makes no progress and an exact error recomputation confirms every row meets
the KKT conditions within tol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError

_STEP_EPS = 1e-12


def rbf_kernel(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    """exp(-gamma * squared euclidean distance)."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ModelError(f"kernel dimension mismatch: {x.shape} vs {z.shape}")
    diff = x - z
    return float(np.exp(-gamma * np.dot(diff, diff)))


def linear_kernel(x: np.ndarray, z: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ModelError(f"kernel dimension mismatch: {x.shape} vs {z.shape}")
    return float(np.dot(x, z))


def kernel_matrix(X: np.ndarray, Z: np.ndarray, kernel: str, gamma: float | None) -> np.ndarray:
    """Pairwise kernel values, rows of X against rows of Z."""
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if X.shape[1] != Z.shape[1]:
        raise ModelError(f"kernel dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    if kernel == "linear":
        return X @ Z.T
    if kernel == "rbf":
        sq = (
            np.sum(X * X, axis=1)[:, None]
            + np.sum(Z * Z, axis=1)[None, :]
            - 2.0 * (X @ Z.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    raise ModelError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    gamma: float | None
    C: float
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for stored rows
    alphas: np.ndarray
    support_labels: np.ndarray
    bias: float
    converged: bool
    n_passes: int


def decision_function(model: SvmModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.support_vectors.shape[1]:
        raise ModelError(
            f"feature dimension {X.shape[1]} does not match model "
            f"dimension {model.support_vectors.shape[1]}"
        )
    K = kernel_matrix(X, model.support_vectors, model.kernel, model.gamma)
    return K @ model.dual_coef + model.bias


def train_svm(
    X,
    y,
    C: float = 1.0,
    kernel: str = "rbf",
    gamma: float | None = None,
    tol: float = 1e-3,
    max_passes: int = 1000,
    seed: int = 0,
) -> SvmModel:
    """Fit the dual problem by SMO. y must be +/-1 with both classes present."""
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
    if C <= 0:
        raise ModelError(f"C must be positive, got {C}")
    if kernel not in ("rbf", "linear"):
        raise ModelError(f"unknown kernel {kernel!r}")
    if kernel == "rbf" and gamma is None:
        gamma = 1.0 / X.shape[1]
    if kernel == "linear":
        gamma = None

    n = len(X)
    K = kernel_matrix(X, X, kernel, gamma)
    alpha = np.zeros(n)
    b = 0.0
    errors = -y.copy()  # f(x) = 0 initially, E = f - y
    rng = np.random.default_rng(seed)

    def take_step(i: int, j: int) -> bool:
        nonlocal b, errors
        if i == j:
            return False
        a_i, a_j = alpha[i], alpha[j]
        y_i, y_j = y[i], y[j]
        e_i, e_j = errors[i], errors[j]
        s = y_i * y_j
        if s > 0:
            low, high = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
        else:
            low, high = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
        if high - low < _STEP_EPS:
            return False
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 0:
            return False
        a_j_new = a_j + y_j * (e_i - e_j) / eta
        a_j_new = min(max(a_j_new, low), high)
        if abs(a_j_new - a_j) < _STEP_EPS * (a_j_new + a_j + _STEP_EPS):
            return False
        a_i_new = min(max(a_i + s * (a_j - a_j_new), 0.0), C)

        d_i, d_j = a_i_new - a_i, a_j_new - a_j
        b1 = b - e_i - y_i * d_i * K[i, i] - y_j * d_j * K[i, j]
        b2 = b - e_j - y_i * d_i * K[i, j] - y_j * d_j * K[j, j]
        if 0.0 < a_i_new < C:
            b_new = b1
        elif 0.0 < a_j_new < C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0

        errors = errors + y_i * d_i * K[:, i] + y_j * d_j * K[:, j] + (b_new - b)
        alpha[i], alpha[j] = a_i_new, a_j_new
        b = b_new
        return True

    def violates(i: int, errs: np.ndarray) -> bool:
        r = errs[i] * y[i]
        return (r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)

    def examine(i: int) -> bool:
        if not violates(i, errors):
            return False
        non_bound = np.flatnonzero((alpha > 0) & (alpha < C))
        if len(non_bound) > 1:
            gaps = np.abs(errors[i] - errors[non_bound])
            j = int(non_bound[int(np.argmax(gaps))])
            if take_step(i, j):
                return True
        for j in rng.permutation(non_bound):
            if take_step(i, int(j)):
                return True
        for j in rng.permutation(n):
            if take_step(i, int(j)):
                return True
        return False

    def exact_errors() -> np.ndarray:
        return K @ (alpha * y) + b - y

    converged = False
    examine_all = True
    passes = 0
    stalled = 0
    while passes < max_passes:
        passes += 1
        if examine_all:
            indices = range(n)
        else:
            indices = np.flatnonzero((alpha > 0) & (alpha < C))
        changed = sum(examine(int(i)) for i in indices)

        if examine_all:
            if changed == 0:
                errors = exact_errors()
                if not any(violates(i, errors) for i in range(n)):
                    converged = True
                    break
                stalled += 1
                if stalled >= 3:
                    break
            else:
                stalled = 0
                examine_all = False
        elif changed == 0:
            examine_all = True

    keep = alpha > 0
    return SvmModel(
        kernel=kernel,
        gamma=gamma,
        C=C,
        support_vectors=X[keep].copy(),
        dual_coef=(alpha * y)[keep],
        alphas=alpha[keep].copy(),
        support_labels=y[keep].copy(),
        bias=b,
        converged=converged,
        n_passes=passes,
    )
