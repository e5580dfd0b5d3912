"""Loss-bound guarantees and their verification on finished runs.

Two additive regret terms are implemented. The combination strategy's
total clipped loss never exceeds the better base model's by more than
``sqrt((t2/2) ln 2)``; that statement is deterministic and a violation
means a bug. The selection strategy is compared against the best
single-switch sequence of base models, with a larger additive term; that
guarantee holds for the expected loss over the selection draws, so a
single run may come out above it and only the average across seeds is
meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..core import InvalidInputError
from ..ensemble import LN2, binary_entropy, default_share
from .run import MethodKind, RunRecord

DETERMINISTIC_TOL = 1e-9


def combine_loss_bound(t2: int) -> float:
    """Additive term of the combination guarantee: sqrt((t2/2) ln 2)."""
    return math.sqrt((t2 / 2.0) * LN2)


def switch_loss_bound(t2: int) -> float:
    """Additive term of the single-switch tracking guarantee.

    Uses the stream-length share 1/(t2-1):
    sqrt((t2/2) (2 ln 2 + H(share)/share)).
    """
    share = default_share(t2)
    return math.sqrt((t2 / 2.0) * (2.0 * LN2 + binary_entropy(share) / share))


def best_switch_loss(losses_first, losses_second) -> Tuple[int, float]:
    """Cheapest way to follow model 1 up to a switch round, then model 2.

    The switch index s ranges over 0..n: s = 0 plays model 2 throughout,
    s = n plays model 1 throughout, so both pure sequences are included.
    Ties break toward the smallest s. Returns (s, total loss).
    """
    l1 = np.asarray(losses_first, dtype=np.float64)
    l2 = np.asarray(losses_second, dtype=np.float64)
    if l1.size == 0 or l1.shape != l2.shape:
        raise InvalidInputError("need two equal-length nonempty loss sequences")
    prefix1 = np.concatenate(([0.0], np.cumsum(l1)))
    prefix2 = np.concatenate(([0.0], np.cumsum(l2)))
    totals = prefix1 + (prefix2[-1] - prefix2)
    s = int(np.argmin(totals))
    return s, float(totals[s])


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking one record against its guarantee.

    ``slack`` is cum_loss - comparator - bound: negative or ~zero means
    the guarantee held. ``deterministic`` marks guarantees that must hold
    on every single run.
    """

    method: MethodKind
    stream_name: str
    seed: int
    t2: int
    cum_loss: float
    comparator: float
    comparator_label: str
    bound: float
    slack: float
    deterministic: bool
    switch_round: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.slack <= DETERMINISTIC_TOL

    def line(self) -> str:
        status = "PASS" if self.passed else ("FAIL" if self.deterministic else "ABOVE")
        extra = f" switch={self.switch_round}" if self.switch_round is not None else ""
        return (
            f"{status} {self.stream_name} {self.method.display} seed={self.seed} "
            f"total={self.cum_loss:.4f} {self.comparator_label}={self.comparator:.4f} "
            f"bound={self.bound:.4f} slack={self.slack:+.4f}{extra}"
        )


def check_bounds(record: RunRecord) -> BoundReport:
    """Check a combination or selection record against its loss guarantee."""
    if record.method not in (MethodKind.FESL_C, MethodKind.FESL_S):
        raise InvalidInputError("bound checks apply to feslc and fesls records")
    if not record.clip_losses:
        raise InvalidInputError(
            "bound checks need clipped weight updates (run with clip on)"
        )
    if record.loss1_clipped is None or record.loss2_clipped is None:
        raise InvalidInputError("record is missing base-model loss series")
    t2 = record.t2
    if record.method is MethodKind.FESL_C:
        comparator = min(float(np.sum(record.loss1_clipped)),
                         float(np.sum(record.loss2_clipped)))
        bound = combine_loss_bound(t2)
        return BoundReport(
            method=record.method, stream_name=record.stream_name,
            seed=record.seed, t2=t2, cum_loss=record.cum_loss,
            comparator=comparator, comparator_label="best_base",
            bound=bound, slack=record.cum_loss - comparator - bound,
            deterministic=True,
        )
    s, comparator = best_switch_loss(record.loss1_clipped, record.loss2_clipped)
    bound = switch_loss_bound(t2)
    return BoundReport(
        method=record.method, stream_name=record.stream_name,
        seed=record.seed, t2=t2, cum_loss=record.cum_loss,
        comparator=comparator, comparator_label="best_switch",
        bound=bound, slack=record.cum_loss - comparator - bound,
        deterministic=False, switch_round=s,
    )
