"""Execute one method over a cycle stream and record everything.

Every run follows the same two-phase script. Rounds 1..t1 train the
old-space model by projected OGD and, during the overlap, feed the
recovery estimator, which is solved at t1. Rounds t1+1..t1+t2 are the
evaluation period: the five methods differ only in how they predict
there.

    nogd    fresh new-space model, gradient steps on the raw stream
    rogdu   old model applied to recovered features, kept updating
    rogdf   old model applied to recovered features, frozen
    feslc   weighted average of the rogdu and nogd predictions
    fesls   per-round sampling between them with fixed-share weights

All randomness (both weight initializations and the selection draws) comes
from a single seeded generator consumed in a fixed order, so two methods
run with the same seed share their base-model trajectories exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .. import backends
from ..core import InvalidInputError, LinearModel, SingularSystemError, StreamSchedule, Task
from ..ensemble import (
    combine_learning_rate,
    default_share,
    select_learning_rate,
)
from ..losses import LN2, LossKind, clip_unit, kind_for_task
from ..recovery import MapEstimator
from ..streams import CycleStream


class MethodKind(Enum):
    NOGD = "nogd"
    ROGD_U = "rogdu"
    ROGD_F = "rogdf"
    FESL_C = "feslc"
    FESL_S = "fesls"

    @property
    def token(self) -> str:
        return self.value

    @property
    def display(self) -> str:
        return {
            MethodKind.NOGD: "NOGD",
            MethodKind.ROGD_U: "ROGD-u",
            MethodKind.ROGD_F: "ROGD-f",
            MethodKind.FESL_C: "FESL-c",
            MethodKind.FESL_S: "FESL-s",
        }[self]

    @classmethod
    def parse(cls, token: str) -> "MethodKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise InvalidInputError(
                f"unknown method {token!r}; expected one of "
                f"{', '.join(m.value for m in cls)}"
            ) from None


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by every method."""

    step_scale: float = 1.0        # c in the step size 1/(c*sqrt(t))
    radius: float = 100.0          # model ball radius
    ridge: float = 1e-3            # recovery regularization
    seed: int = 0
    clip_losses: bool = True       # feed [0,1]-clipped losses to the weights
    combine_rate: Optional[float] = None   # override the t2-derived rate
    select_rate: Optional[float] = None
    share: Optional[float] = None          # override the fixed-share fraction
    backend: Optional[str] = None          # "python" | "compiled" | None=auto

    def __post_init__(self):
        if not (self.step_scale > 0 and self.radius > 0):
            raise InvalidInputError("step_scale and radius must be positive")
        if self.ridge < 0:
            raise InvalidInputError("ridge must be nonnegative")


@dataclass
class RunRecord:
    """Per-round traces and summaries of one (stream, method, seed) run.

    Rows cover the evaluation rounds t1+1..t1+t2; every summary is defined
    over those rounds. ``alpha1`` holds the first model's weight as used
    for each round's prediction. ``loss_clipped`` is the [0,1] clip of
    ``loss_raw`` regardless of the clip flag; the flag records whether the
    ensemble weights consumed clipped losses.
    """

    method: MethodKind
    seed: int
    stream_name: str
    task: Task
    schedule: StreamSchedule
    step_scale: float
    radius: float
    ridge: float
    clip_losses: bool
    rate: Optional[float]          # ensemble weight-update rate, if any
    share: Optional[float]         # fixed-share fraction, if any
    rounds: np.ndarray             # absolute round indices
    predictions: np.ndarray
    loss_raw: np.ndarray
    loss_clipped: np.ndarray
    f1: Optional[np.ndarray] = None
    f2: Optional[np.ndarray] = None
    loss1_clipped: Optional[np.ndarray] = None
    loss2_clipped: Optional[np.ndarray] = None
    alpha1: Optional[np.ndarray] = None
    choice: Optional[np.ndarray] = None
    accuracy: Optional[float] = None
    cum_loss: float = 0.0                  # clipped ensemble loss total
    cum_loss_old: Optional[float] = None   # clipped f1 loss total
    cum_loss_new: Optional[float] = None   # clipped f2 loss total
    avg_cum_loss: np.ndarray = field(default_factory=lambda: np.empty(0))

    def finalize(self) -> "RunRecord":
        """Fill the summary fields from the per-round series."""
        self.cum_loss = float(np.sum(self.loss_clipped))
        if self.loss1_clipped is not None:
            self.cum_loss_old = float(np.sum(self.loss1_clipped))
        if self.loss2_clipped is not None:
            self.cum_loss_new = float(np.sum(self.loss2_clipped))
        self.avg_cum_loss = avg_cumulative_series(self.loss_clipped)
        return self

    @property
    def t2(self) -> int:
        return self.schedule.t2


def avg_cumulative_series(losses) -> np.ndarray:
    """Running mean of a loss sequence: entry k averages the first k+1."""
    losses = np.asarray(losses, dtype=np.float64)
    if losses.size == 0:
        raise InvalidInputError("need at least one loss")
    return np.cumsum(losses) / np.arange(1, losses.size + 1)


def accuracy(record: RunRecord, stream: CycleStream) -> float:
    """Fraction of evaluation rounds whose prediction sign matches the label.

    A zero prediction counts as +1.
    """
    if stream.task is not Task.CLASSIFICATION:
        raise InvalidInputError("accuracy is defined for classification only")
    labels = stream.labels_new_phase()
    if labels.shape[0] != record.predictions.shape[0]:
        raise InvalidInputError("record and stream evaluation lengths differ")
    signs = np.where(record.predictions >= 0, 1.0, -1.0)
    return float(np.mean(signs == labels))


def _vector_loss(kind: LossKind, preds: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind is LossKind.LOGISTIC:
        return np.logaddexp(0.0, -y * preds) / LN2
    return (y - preds) ** 2


def run_method(stream: CycleStream, method: MethodKind,
               config: RunConfig = RunConfig()) -> RunRecord:
    """Run one method over the full cycle; deterministic in (stream, method,
    seed, config), bit for bit."""
    sched = stream.schedule
    kind = kind_for_task(stream.task)
    kind_code = 0 if kind is LossKind.LOGISTIC else 1
    loops = backends.get_loops(config.backend)

    # One generator, fixed consumption order: w1 init, w2 init, selection
    # draws. Methods that ignore a draw still consume it, which keeps base
    # trajectories aligned across methods at equal seeds.
    rng = np.random.default_rng(config.seed)
    w1_init = LinearModel.initialize(sched.d1, config.radius, rng).weights
    w2_init = LinearModel.initialize(sched.d2, config.radius, rng).weights
    uniforms = rng.random(sched.t2)

    # Rounds 1..t1: train the old-space model, fit the recovery map.
    w1_trained, _, _ = loops.ogd_loop(
        stream.old_matrix(), stream.labels_old_phase(), w1_init,
        config.step_scale, config.radius, kind_code,
    )
    est = MapEstimator(sched.d2, sched.d1, ridge=config.ridge)
    est.accumulate_batch(*stream.overlap_pairs())
    try:
        est.solve()
    except SingularSystemError as exc:
        raise SingularSystemError(f"round {sched.t1}: {exc}") from exc

    x_new = stream.new_matrix()
    y_new = stream.labels_new_phase()
    x_rec = est.recover_batch(x_new)

    rec = RunRecord(
        method=method, seed=config.seed, stream_name=stream.name,
        task=stream.task, schedule=sched,
        step_scale=config.step_scale, radius=config.radius,
        ridge=config.ridge, clip_losses=config.clip_losses,
        rate=None, share=None,
        rounds=np.arange(sched.t1 + 1, sched.t1 + sched.t2 + 1, dtype=np.int64),
        predictions=np.empty(0), loss_raw=np.empty(0), loss_clipped=np.empty(0),
    )

    if method is MethodKind.NOGD:
        _, f2, raw = loops.ogd_loop(x_new, y_new, w2_init,
                                    config.step_scale, config.radius, kind_code)
        rec.f2, rec.predictions, rec.loss_raw = f2, f2, raw
        rec.loss2_clipped = clip_unit(raw)
    elif method is MethodKind.ROGD_U:
        _, f1, raw = loops.ogd_loop(x_rec, y_new, w1_trained,
                                    config.step_scale, config.radius, kind_code)
        rec.f1, rec.predictions, rec.loss_raw = f1, f1, raw
        rec.loss1_clipped = clip_unit(raw)
    elif method is MethodKind.ROGD_F:
        f1 = x_rec @ w1_trained
        raw = _vector_loss(kind, f1, y_new)
        rec.f1, rec.predictions, rec.loss_raw = f1, f1, raw
        rec.loss1_clipped = clip_unit(raw)
    elif method is MethodKind.FESL_C:
        rate = (config.combine_rate if config.combine_rate is not None
                else combine_learning_rate(sched.t2))
        out = loops.combine_loop(x_rec, x_new, y_new, w1_trained, w2_init,
                                 config.step_scale, config.radius, kind_code,
                                 rate, config.clip_losses)
        rec.rate = rate
        _fill_ensemble(rec, out)
    elif method is MethodKind.FESL_S:
        rate = (config.select_rate if config.select_rate is not None
                else select_learning_rate(sched.t2))
        share = config.share if config.share is not None else default_share(sched.t2)
        out = loops.select_loop(x_rec, x_new, y_new, w1_trained, w2_init,
                                config.step_scale, config.radius, kind_code,
                                rate, share, uniforms, config.clip_losses)
        rec.rate, rec.share = rate, share
        _fill_ensemble(rec, out)
        rec.choice = out["choice"]
    else:  # pragma: no cover
        raise InvalidInputError(f"unhandled method {method}")

    rec.loss_clipped = clip_unit(rec.loss_raw)
    rec.finalize()
    if stream.task is Task.CLASSIFICATION:
        rec.accuracy = accuracy(rec, stream)
    return rec


def _fill_ensemble(rec: RunRecord, out: dict) -> None:
    rec.f1, rec.f2 = out["f1"], out["f2"]
    rec.predictions = out["pred"]
    rec.loss_raw = out["loss_raw"]
    rec.loss1_clipped = clip_unit(out["loss1_raw"])
    rec.loss2_clipped = clip_unit(out["loss2_raw"])
    rec.alpha1 = out["alpha1"]


def run_many(stream: CycleStream, methods: Sequence[MethodKind],
             seeds: Sequence[int], config: RunConfig = RunConfig()):
    """All (method, seed) combinations, in deterministic order."""
    return [
        run_method(stream, method, replace(config, seed=seed))
        for method in methods
        for seed in seeds
    ]
