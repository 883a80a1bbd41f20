"""One-vs-rest SVM with a degree-5 polynomial kernel, trained by SMO.

The dual is solved by maximal-violating-pair selection: at each step the
pair (i, j) with the largest KKT violation is updated analytically until
the violation gap falls within tolerance or the iteration budget runs out.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_CLASSES = 4


@dataclass(frozen=True)
class SvmConfig:
    degree: int = 5
    gamma: float = 1.0
    coef0: float = 1.0
    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 10_000

    def __post_init__(self):
        if self.degree != 5:
            raise ValueError("the fusion kernel is fixed at degree 5")
        if self.gamma <= 0 or self.C <= 0 or self.tol <= 0:
            raise ValueError("gamma, C and tol must be positive")


def poly_kernel(x: np.ndarray, y: np.ndarray, config: SvmConfig) -> float | np.ndarray:
    """(gamma * <x, y> + coef0) ** degree"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("kernel arguments must share their feature dimension")
    return (config.gamma * (x @ y.T) + config.coef0) ** config.degree


def gram_matrix(x: np.ndarray, config: SvmConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return (config.gamma * (x @ x.T) + config.coef0) ** config.degree


@dataclass
class BinarySvm:
    """One binary classifier of the one-vs-rest ensemble."""

    support_vectors: np.ndarray  # [n_sv, d]
    dual_coef: np.ndarray        # alpha_i * y_i over support vectors
    bias: float
    converged: bool
    iterations: int
    # full dual state over the training set; kept for diagnostics, not
    # serialized to checkpoints
    train_alpha: np.ndarray | None = None

    def decision(self, x: np.ndarray, config: SvmConfig) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if len(self.dual_coef) == 0:
            return np.full(x.shape[0], self.bias)
        k = (config.gamma * (x @ self.support_vectors.T) + config.coef0) ** config.degree
        return k @ self.dual_coef + self.bias


def _smo_binary(gram, y, config):
    """Maximal-violating-pair SMO on the dual; y entries are +/-1.

    Returns (alpha, bias, converged, iterations).
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - sum(a), with Q = yy' * K
    c = config.C

    def violation_pair():
        neg_ygrad = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        i = int(np.where(up, neg_ygrad, -np.inf).argmax())
        j = int(np.where(low, neg_ygrad, np.inf).argmin())
        return i, j, neg_ygrad[i], neg_ygrad[j]

    iterations = 0
    while iterations < config.max_passes:
        i, j, m_up, m_low = violation_pair()
        if m_up - m_low <= config.tol:
            break
        iterations += 1
        quad = gram[i, i] + gram[j, j] - 2.0 * y[i] * y[j] * gram[i, j]
        step = (m_up - m_low) / max(quad, 1e-12)
        hi_i = c - alpha[i] if y[i] > 0 else alpha[i]
        hi_j = alpha[j] if y[j] > 0 else c - alpha[j]
        t = min(step, hi_i, hi_j)
        d_i = y[i] * t
        d_j = -y[j] * t
        alpha[i] += d_i
        alpha[j] += d_j
        grad += y * (gram[:, i] * (y[i] * d_i) + gram[:, j] * (y[j] * d_j))

    _, _, m_up, m_low = violation_pair()
    converged = (m_up - m_low) <= config.tol
    bias = (m_up + m_low) / 2.0 if iterations > 0 else 0.0
    return alpha, bias, converged, iterations


@dataclass
class SvmModel:
    config: SvmConfig
    classifiers: list[BinarySvm] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(clf.converged for clf in self.classifiers)

    def decision_values(self, x: np.ndarray) -> np.ndarray:
        """Per-class one-vs-rest decision values, [n, 4]."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.stack(
            [clf.decision(x, self.config) for clf in self.classifiers], axis=1
        )


def svm_fit(features: np.ndarray, labels: np.ndarray, config: SvmConfig) -> SvmModel:
    """Train 4 one-vs-rest binary SVMs on length-8 fusion features."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not np.isfinite(features).all():
        raise ValueError("features must be finite")
    if len(np.unique(labels)) < 2:
        raise ValueError("training data must contain at least two classes")
    gram = gram_matrix(features, config)
    classifiers = []
    for k in range(N_CLASSES):
        y = np.where(labels == k, 1.0, -1.0)
        alpha, bias, converged, iters = _smo_binary(gram, y, config)
        sv = alpha > 1e-12
        classifiers.append(
            BinarySvm(
                support_vectors=features[sv].copy(),
                dual_coef=(alpha * y)[sv],
                bias=bias,
                converged=converged,
                iterations=iters,
                train_alpha=alpha,
            )
        )
    return SvmModel(config=config, classifiers=classifiers)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def svm_predict(model: SvmModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, confidences) for a feature batch.

    Label: argmax of the one-vs-rest decision values (ties break to the
    lowest class index). Confidence: softmax over the decision values at
    the argmax; a monotone squashing for thresholding, not a calibrated
    probability.
    """
    if not model.classifiers:
        raise ValueError("model has not been trained")
    decisions = model.decision_values(features)
    labels = decisions.argmax(axis=1)
    probs = _softmax_rows(decisions)
    return labels, probs[np.arange(len(labels)), labels]


def svm_scores(model: SvmModel, features: np.ndarray) -> np.ndarray:
    """Softmax over decision values: the fused 4-vector per sample."""
    return _softmax_rows(model.decision_values(features))


def kkt_violation(model: SvmModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Largest KKT violation over all classifiers and training points.

    At an exact optimum: alpha=0 points have margin >= 1, alpha=C points
    have margin <= 1, and interior points sit on the margin.
    """
    features = np.asarray(features, dtype=np.float64)
    c = model.config.C
    worst = 0.0
    for k, clf in enumerate(model.classifiers):
        if clf.train_alpha is None:
            raise ValueError("model was loaded without its full dual state")
        y = np.where(np.asarray(labels) == k, 1.0, -1.0)
        margins = y * clf.decision(features, model.config)
        alpha = clf.train_alpha
        at_zero = alpha <= 1e-12
        at_bound = alpha >= c - 1e-12
        interior = ~(at_zero | at_bound)
        if at_zero.any():
            worst = max(worst, float((1.0 - margins[at_zero]).max()))
        if at_bound.any():
            worst = max(worst, float((margins[at_bound] - 1.0).max()))
        if interior.any():
            worst = max(worst, float(np.abs(margins[interior] - 1.0).max()))
    return worst
