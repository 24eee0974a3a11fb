"""
Multinomial logistic regression fit by full-batch gradient descent.

Features are standardized with training statistics. The L2 penalty applies to
the weights only. Each iteration backtracks until the Armijo condition holds,
so the training loss never increases.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from src.errors import ContractError, DimensionError
from src.numeric.rng import RngStream

MAX_ITERATIONS = 5000
GRADIENT_TOLERANCE = 1e-5
ARMIJO = 1e-4
MIN_STEP = 1e-12


@dataclass
class LinearModel:
    """Fitted linear classifier"""
    weights: np.ndarray
    bias: np.ndarray
    classes: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    loss_history: List[float] = field(default_factory=list)
    iterations: int = 0

    def scores(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.weights.shape[0]:
            raise DimensionError(f"Features have shape {x.shape}, model expects {self.weights.shape[0]} columns")
        return ((x - self.mean) / self.scale) @ self.weights + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Predicted labels (features only; labels never enter prediction)"""
        return self.classes[np.argmax(self.scores(x), axis=1)]

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


def _loss_and_grad(z: np.ndarray, onehot: np.ndarray, w: np.ndarray, b: np.ndarray, reg: float):
    logits = z @ w + b
    log_norm = logsumexp(logits, axis=1, keepdims=True)
    n = z.shape[0]
    loss = float(np.sum(log_norm - np.sum(onehot * logits, axis=1, keepdims=True)) / n + 0.5 * reg * np.sum(w * w))
    probs = np.exp(logits - log_norm)
    diff = (probs - onehot) / n
    return loss, z.T @ diff + reg * w, diff.sum(axis=0)


def logistic_loss(model: LinearModel, x: np.ndarray, y: np.ndarray, reg: float) -> float:
    """Regularized mean cross-entropy of `model` on (x, y)"""
    index = np.searchsorted(model.classes, y)
    onehot = np.eye(len(model.classes))[index]
    z = (x - model.mean) / model.scale
    return _loss_and_grad(z, onehot, model.weights, model.bias, reg)[0]


def train_linear_classifier(
    x: np.ndarray,
    y: np.ndarray,
    reg: float = 1e-3,
    rng: Optional[RngStream] = None,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = GRADIENT_TOLERANCE,
) -> LinearModel:
    """
    Fit multinomial logistic regression

    Args:
        x: Features (n x k)
        y: Integer labels (n)
        reg: L2 penalty on the weights
        rng: Stream for a small random weight initialization (default zeros)
        max_iterations: Iteration cap
        tolerance: Stop when the gradient norm drops below this

    Returns:
        LinearModel with its loss history
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise DimensionError(f"Need x with one row per label, got x {x.shape} and {len(y)} labels")
    if reg < 0:
        raise ContractError(f"reg must be >= 0, got {reg}")
    classes, index = np.unique(y, return_inverse=True)
    if len(classes) < 2:
        raise ContractError(f"Classifier needs at least 2 classes, got {classes.tolist()}")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale < 1e-12] = 1.0
    z = (x - mean) / scale
    onehot = np.eye(len(classes))[index]

    k = x.shape[1]
    if rng is None:
        w = np.zeros((k, len(classes)))
    else:
        w = 0.01 * rng.standard_normal(k, len(classes))
    b = np.zeros(len(classes))

    loss, gw, gb = _loss_and_grad(z, onehot, w, b, reg)
    history = [loss]
    step = 1.0
    iterations = 0
    while iterations < max_iterations:
        grad_sq = float(np.sum(gw * gw) + np.sum(gb * gb))
        if np.sqrt(grad_sq) < tolerance:
            break
        while True:
            w_new, b_new = w - step * gw, b - step * gb
            new_loss, new_gw, new_gb = _loss_and_grad(z, onehot, w_new, b_new, reg)
            if new_loss <= loss - ARMIJO * step * grad_sq or step < MIN_STEP:
                break
            step *= 0.5
        if new_loss > loss:
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        history.append(loss)
        iterations += 1
        step = min(step * 2.0, 1e3)

    return LinearModel(weights=w, bias=b, classes=classes, mean=mean, scale=scale,
                       loss_history=history, iterations=iterations)
