"""Experiment harness: method runners, bound checks, record files, CLI."""

from .bounds import (
    BoundReport,
    best_switch_loss,
    check_bounds,
    combine_loss_bound,
    switch_loss_bound,
)
from .presets import step_scale_for
from .records import read_record, read_records_dir, record_filename, write_record
from .run import (
    MethodKind,
    RunConfig,
    RunRecord,
    accuracy,
    avg_cumulative_series,
    run_many,
    run_method,
)

__all__ = [
    "BoundReport",
    "MethodKind",
    "RunConfig",
    "RunRecord",
    "accuracy",
    "avg_cumulative_series",
    "best_switch_loss",
    "check_bounds",
    "combine_loss_bound",
    "read_record",
    "read_records_dir",
    "record_filename",
    "run_many",
    "run_method",
    "step_scale_for",
    "switch_loss_bound",
    "write_record",
]
