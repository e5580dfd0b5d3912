"""Loss functions with value and weight-space gradient evaluation.

Two losses are supported: base-2 logistic loss for classification,
``log(1 + exp(-y*f)) / log(2)``, and square loss ``(y - f)**2`` for
regression. Both are convex in the prediction. The logistic value is
computed through the stable softplus branch ``max(z, 0) + log1p(exp(-|z|))``
because predictions can reach hundreds in magnitude under a large model
ball.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .core import InvalidInputError, Label, LinearModel, Task, as_vector

LN2 = math.log(2.0)


class LossKind(Enum):
    LOGISTIC = "logistic"
    SQUARE = "square"

    @property
    def task(self) -> Task:
        return Task.CLASSIFICATION if self is LossKind.LOGISTIC else Task.REGRESSION


def kind_for_task(task: Task) -> LossKind:
    return LossKind.LOGISTIC if task is Task.CLASSIFICATION else LossKind.SQUARE


def check_pairing(kind: LossKind, label: Label):
    label.validate()
    if kind.task is not label.task:
        raise InvalidInputError(
            f"{kind.value} loss cannot score a {label.task.value} label"
        )


def _softplus(z: float) -> float:
    # max(z, 0) + log1p(exp(-|z|)), exact at z = 0
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def loss(kind: LossKind, prediction: float, label: Label) -> float:
    """Evaluate the loss of a scalar prediction against a label."""
    check_pairing(kind, label)
    if not math.isfinite(prediction):
        raise InvalidInputError(f"prediction must be finite, got {prediction}")
    if kind is LossKind.LOGISTIC:
        return _softplus(-label.value * prediction) / LN2
    diff = label.value - prediction
    return diff * diff


def loss_gradient(kind: LossKind, model: LinearModel, x, label: Label) -> np.ndarray:
    """Gradient of ``loss(kind, <w, x>, label)`` with respect to the weights.

    Logistic: ``(-y / ln 2) * sigmoid(-y * <w, x>) * x``.
    Square:   ``2 * (<w, x> - y) * x``.
    """
    check_pairing(kind, label)
    x = as_vector(x, "x")
    if x.shape[0] != model.dim:
        raise InvalidInputError(
            f"feature dim {x.shape[0]} does not match model dim {model.dim}"
        )
    f = float(np.dot(model.weights, x))
    return scalar_loss_derivative(kind, f, label.value) * x


def scalar_loss_derivative(kind: LossKind, prediction: float, y: float) -> float:
    """d loss / d prediction, used by gradient steps via the chain rule."""
    if kind is LossKind.LOGISTIC:
        return (-y / LN2) * _sigmoid(-y * prediction)
    return 2.0 * (prediction - y)


def scalar_loss(kind: LossKind, prediction: float, y: float) -> float:
    """Unchecked scalar loss; hot-loop companion of :func:`loss`."""
    if kind is LossKind.LOGISTIC:
        return _softplus(-y * prediction) / LN2
    diff = y - prediction
    return diff * diff


def clip_unit(values):
    """Clip losses into [0, 1], the range the ensemble analysis assumes."""
    return np.clip(values, 0.0, 1.0)
