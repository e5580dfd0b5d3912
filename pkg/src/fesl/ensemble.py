"""Two-model ensembling: exponentially weighted combination and
fixed-share dynamic selection.

Both strategies maintain a pair of nonnegative weights over the base
predictions. Combination outputs the weighted average and multiplies each
weight by ``exp(-rate * loss)``; selection samples one base model from the
normalized weights and, after the losses arrive, mixes a ``share`` fraction
of the total mass back uniformly so the weights can track a comparator
that switches models partway through the stream.

Weights are renormalized to sum to one after every update: the raw
multiplicative weights decay geometrically and would underflow over long
streams, while both the combination formula and the selection distribution
depend only on the ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .core import InvalidInputError, StateError

LN2 = math.log(2.0)


class Mode(Enum):
    COMBINE = "combine"
    SELECT = "select"


def binary_entropy(x: float) -> float:
    """Entropy of a Bernoulli(x) in nats, defined for x in (0, 1)."""
    if not 0.0 < x < 1.0:
        raise InvalidInputError(f"binary_entropy needs x in (0,1), got {x}")
    return -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)


def combine_learning_rate(t2: int) -> float:
    """Weight-update rate for the combination strategy over t2 rounds."""
    if t2 < 2:
        raise InvalidInputError(f"need t2 >= 2, got {t2}")
    return math.sqrt(8.0 * LN2 / t2)


def select_learning_rate(t2: int) -> float:
    """Weight-update rate for the selection strategy over t2 rounds.

    Accounts for the number of single-switch comparator sequences, hence
    the binary-entropy term at the default share 1/(t2-1).
    """
    if t2 < 3:
        raise InvalidInputError(f"need t2 >= 3, got {t2}")
    h = binary_entropy(1.0 / (t2 - 1))
    return math.sqrt((8.0 / t2) * (2.0 * LN2 + (t2 - 1) * h))


def default_share(t2: int) -> float:
    """Uniform-mixing fraction for selection: 1/(t2-1)."""
    if t2 < 3:
        raise InvalidInputError(f"need t2 >= 3, got {t2}")
    return 1.0 / (t2 - 1)


@dataclass(frozen=True)
class EnsembleState:
    """Weight pair plus the parameters that drive its updates.

    ``alpha`` always sums to one. ``share`` is zero in combine mode. The
    RNG is only consumed by :func:`select_predict`.
    """

    alpha: Tuple[float, float]
    eta: float
    share: float = 0.0
    mode: Mode = Mode.COMBINE
    rng: Optional[np.random.Generator] = None
    clip_losses: bool = True

    def __post_init__(self):
        a1, a2 = self.alpha
        if a1 < 0 or a2 < 0 or not math.isclose(a1 + a2, 1.0, abs_tol=1e-9):
            raise InvalidInputError(f"alpha must be a distribution, got {self.alpha}")
        if not (self.eta > 0):
            raise InvalidInputError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.share < 1.0:
            raise InvalidInputError(f"share must be in [0,1), got {self.share}")
        if self.mode is Mode.SELECT and self.rng is None:
            raise InvalidInputError("select mode needs a seeded rng")

    @classmethod
    def combine(cls, t2: Optional[int] = None, eta: Optional[float] = None,
                clip_losses: bool = True) -> "EnsembleState":
        if eta is None:
            if t2 is None:
                raise InvalidInputError("give either t2 or eta")
            eta = combine_learning_rate(t2)
        return cls(alpha=(0.5, 0.5), eta=eta, mode=Mode.COMBINE,
                   clip_losses=clip_losses)

    @classmethod
    def select(cls, t2: Optional[int] = None, eta: Optional[float] = None,
               share: Optional[float] = None, seed: int = 0,
               rng: Optional[np.random.Generator] = None,
               clip_losses: bool = True) -> "EnsembleState":
        if eta is None or share is None:
            if t2 is None:
                raise InvalidInputError("give t2 or both eta and share")
            eta = select_learning_rate(t2) if eta is None else eta
            share = default_share(t2) if share is None else share
        if rng is None:
            rng = np.random.default_rng(seed)
        return cls(alpha=(0.5, 0.5), eta=eta, share=share, mode=Mode.SELECT,
                   rng=rng, clip_losses=clip_losses)


def combine_predict(state: EnsembleState, f1: float, f2: float) -> float:
    """Weighted average of the two base predictions."""
    if state.mode is not Mode.COMBINE:
        raise StateError("combine_predict requires combine mode")
    return state.alpha[0] * f1 + state.alpha[1] * f2


def select_predict(state: EnsembleState, f1: float, f2: float) -> Tuple[int, float]:
    """Sample a base model from the weights; returns (choice, prediction).

    The choice is 1-based. Advances the state's RNG stream.
    """
    if state.mode is not Mode.SELECT:
        raise StateError("select_predict requires select mode")
    p1 = state.alpha[0] / (state.alpha[0] + state.alpha[1])
    choice = 1 if state.rng.random() < p1 else 2
    return choice, (f1 if choice == 1 else f2)


def _prepare_losses(state: EnsembleState, loss1: float, loss2: float):
    if not (math.isfinite(loss1) and math.isfinite(loss2)):
        raise InvalidInputError(f"losses must be finite, got {(loss1, loss2)}")
    if loss1 < 0 or loss2 < 0:
        raise InvalidInputError(f"losses must be nonnegative, got {(loss1, loss2)}")
    if state.clip_losses:
        loss1, loss2 = min(loss1, 1.0), min(loss2, 1.0)
    return loss1, loss2


def exp_weight_pair(a1: float, a2: float, eta: float,
                    loss1: float, loss2: float) -> Tuple[float, float]:
    """Multiply by exp(-eta * loss), shifted by the smaller loss so the
    computation never underflows; the shift cancels under normalization."""
    m = min(loss1, loss2)
    return a1 * math.exp(-eta * (loss1 - m)), a2 * math.exp(-eta * (loss2 - m))


def update_combine(state: EnsembleState, loss1: float, loss2: float) -> EnsembleState:
    """Exponential weight update; returns a new state with alpha renormalized."""
    if state.mode is not Mode.COMBINE:
        raise StateError("update_combine requires combine mode")
    loss1, loss2 = _prepare_losses(state, loss1, loss2)
    v1, v2 = exp_weight_pair(state.alpha[0], state.alpha[1], state.eta, loss1, loss2)
    total = v1 + v2
    return replace(state, alpha=(v1 / total, v2 / total))


def update_select(state: EnsembleState, loss1: float, loss2: float) -> EnsembleState:
    """Fixed-share update: exponential reweighting, then a uniform mix of a
    ``share`` fraction of the total mass, then renormalization.

    Each updated weight is at least ``share / 2``.
    """
    if state.mode is not Mode.SELECT:
        raise StateError("update_select requires select mode")
    loss1, loss2 = _prepare_losses(state, loss1, loss2)
    v1, v2 = exp_weight_pair(state.alpha[0], state.alpha[1], state.eta, loss1, loss2)
    pool = v1 + v2
    a1 = state.share * pool / 2.0 + (1.0 - state.share) * v1
    a2 = state.share * pool / 2.0 + (1.0 - state.share) * v2
    total = a1 + a2
    return replace(state, alpha=(a1 / total, a2 / total))
