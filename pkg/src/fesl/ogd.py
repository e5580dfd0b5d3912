"""Projected online gradient descent with a decaying step size.

The step size at local round t is ``1 / (c * sqrt(t))`` where ``c`` is a
per-dataset scale constant. The local round counter restarts whenever a
learner begins a new phase of the stream, so the schedule restarts along
with the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, Label, LinearModel, as_vector, project_ball
from .losses import LossKind, check_pairing, scalar_loss_derivative


@dataclass(frozen=True)
class OgdState:
    """A linear model plus its step-size schedule position."""

    model: LinearModel
    step_scale: float = 1.0
    local_round: int = 1

    def __post_init__(self):
        if not (self.step_scale > 0):
            raise InvalidInputError(f"step_scale must be positive, got {self.step_scale}")
        if self.local_round < 1:
            raise InvalidInputError(f"local_round must be >= 1, got {self.local_round}")

    @property
    def step_size(self) -> float:
        return 1.0 / (self.step_scale * math.sqrt(self.local_round))


def ogd_step(state: OgdState, x, label: Label, kind: LossKind) -> OgdState:
    """One projected gradient step; returns a new state, input untouched.

    The loss gradient factors as ``s * x`` with scalar ``s``; folding the
    step size into ``s`` first keeps this op bit-identical to the fused
    per-phase loops.
    """
    check_pairing(kind, label)
    x = as_vector(x, "x")
    if x.shape[0] != state.model.dim:
        raise InvalidInputError(
            f"feature dim {x.shape[0]} does not match model dim {state.model.dim}"
        )
    f = float(np.dot(state.model.weights, x))
    s = scalar_loss_derivative(kind, f, label.value)
    w = project_ball(state.model.weights - (state.step_size * s) * x,
                     state.model.radius)
    return OgdState(
        model=LinearModel(weights=w, radius=state.model.radius),
        step_scale=state.step_scale,
        local_round=state.local_round + 1,
    )


def ogd_step_recovered(state: OgdState, est, x_new, label: Label,
                       kind: LossKind) -> OgdState:
    """Gradient step on a new-space instance mapped back to the old space.

    Equivalent to ``ogd_step(state, est.recover(x_new), ...)``.
    """
    x_new = as_vector(x_new, "x_new")
    return ogd_step(state, est.recover(x_new), label, kind)
