"""Shared domain types: stream phases, schedules, labels, and linear models.

Feature vectors are plain 1-D float64 numpy arrays throughout the package;
everything is densified at ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np


class FeslError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(FeslError, ValueError):
    """An argument violates a precondition (bad value, dimension mismatch)."""


class StateError(FeslError, RuntimeError):
    """An operation was called on an object in the wrong state."""


class FormatError(FeslError, ValueError):
    """A file could not be parsed."""


class SingularSystemError(FeslError):
    """A linear solve hit a singular system (raise the ridge term to fix)."""


class Task(Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class Phase(Enum):
    """Which feature space(s) a round exposes."""

    OLD_ONLY = "old"
    OVERLAP = "overlap"
    NEW_ONLY = "new"


class Label(NamedTuple):
    """A supervised target together with the task it belongs to.

    Classification labels must be exactly -1.0 or +1.0.
    """

    value: float
    task: Task

    def validate(self):
        if not math.isfinite(self.value):
            raise InvalidInputError(f"label must be finite, got {self.value}")
        if self.task is Task.CLASSIFICATION and self.value not in (-1.0, 1.0):
            raise InvalidInputError(
                f"classification labels must be -1 or +1, got {self.value}"
            )
        return self


def as_vector(x, name="x") -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class StreamSchedule:
    """Round layout of one feature-evolution cycle.

    Rounds 1..t1-b expose only the old space, rounds t1-b+1..t1 expose both
    (the overlap), and rounds t1+1..t1+t2 expose only the new space.
    """

    t1: int
    t2: int
    b: int
    d1: int
    d2: int

    def __post_init__(self):
        for field in ("t1", "t2", "b", "d1", "d2"):
            if getattr(self, field) < 1:
                raise InvalidInputError(f"{field} must be positive")
        if not 1 <= self.b < self.t1:
            raise InvalidInputError(f"need 1 <= b < t1, got b={self.b}, t1={self.t1}")
        if self.t2 < 3:
            raise InvalidInputError(f"need t2 >= 3, got t2={self.t2}")

    @property
    def total_rounds(self) -> int:
        return self.t1 + self.t2

    def phase_of(self, round: int) -> Phase:
        """Phase of a 1-based round index."""
        if round < 1 or round > self.total_rounds:
            raise InvalidInputError(
                f"round {round} outside 1..{self.total_rounds}"
            )
        if round <= self.t1 - self.b:
            return Phase.OLD_ONLY
        if round <= self.t1:
            return Phase.OVERLAP
        return Phase.NEW_ONLY


@dataclass(frozen=True)
class Instance:
    """One round's observation."""

    round: int
    phase: Phase
    x_old: Optional[np.ndarray]
    x_new: Optional[np.ndarray]
    label: Label

    def __post_init__(self):
        self.label.validate()
        has_old, has_new = self.x_old is not None, self.x_new is not None
        expected = {
            Phase.OLD_ONLY: (True, False),
            Phase.OVERLAP: (True, True),
            Phase.NEW_ONLY: (False, True),
        }[self.phase]
        if (has_old, has_new) != expected:
            raise InvalidInputError(
                f"round {self.round}: phase {self.phase.value} expects "
                f"(x_old, x_new) presence {expected}, got {(has_old, has_new)}"
            )


def project_ball(v, radius: float) -> np.ndarray:
    """Project a vector onto the L2 ball of the given radius.

    Returns ``v`` unchanged (as float64) when it is already inside the ball,
    otherwise scales it radially onto the boundary.
    """
    if not (radius > 0):
        raise InvalidInputError(f"radius must be positive, got {radius}")
    v = as_vector(v, "v")
    norm = math.sqrt(float(np.dot(v, v)))
    if norm <= radius:
        return v
    return v * (radius / norm)


@dataclass(frozen=True)
class LinearModel:
    """A weight vector confined to an L2 ball of the given radius."""

    weights: np.ndarray
    radius: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "weights", as_vector(self.weights, "weights"))
        if not (self.radius > 0):
            raise InvalidInputError(f"radius must be positive, got {self.radius}")
        norm = math.sqrt(float(np.dot(self.weights, self.weights)))
        if norm > self.radius * (1 + 1e-12):
            raise InvalidInputError(
                f"weight norm {norm} exceeds ball radius {self.radius}"
            )

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def initialize(cls, dim: int, radius: float, rng: np.random.Generator,
                   scale: float = 0.01) -> "LinearModel":
        """Draw small i.i.d. Gaussian weights and project them into the ball."""
        w = project_ball(scale * rng.standard_normal(dim), radius)
        return cls(weights=w, radius=radius)


def predict(model: LinearModel, x) -> float:
    """Linear prediction: the inner product of model weights and features."""
    x = as_vector(x, "x")
    if x.shape[0] != model.dim:
        raise InvalidInputError(
            f"feature dim {x.shape[0]} does not match model dim {model.dim}"
        )
    return float(np.dot(model.weights, x))
