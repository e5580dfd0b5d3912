"""Streaming learning across an evolving feature space.

When an old feature set is about to vanish and a new one appears with a
short overlap, this package learns a linear map from new to old features,
keeps the old model alive on recovered inputs, and ensembles the old and
new models by exponential weighting or fixed-share selection, alongside
the plain online-gradient-descent baselines. A harness runs the methods
over seeded streams, records per-round traces, and verifies the loss
guarantees empirically.
"""

from .core import (
    FeslError,
    FormatError,
    Instance,
    InvalidInputError,
    Label,
    LinearModel,
    Phase,
    SingularSystemError,
    StateError,
    StreamSchedule,
    Task,
    predict,
    project_ball,
)
from .losses import LossKind, loss, loss_gradient
from .ogd import OgdState, ogd_step, ogd_step_recovered
from .recovery import MapEstimator
from .ensemble import (
    EnsembleState,
    Mode,
    binary_entropy,
    combine_learning_rate,
    combine_predict,
    select_learning_rate,
    select_predict,
    update_combine,
    update_select,
)
from .streams import (
    CycleStream,
    DatasetSpec,
    Source,
    build_cycle,
    generated_stream,
    load_batch,
    read_stream,
    synthesize_second_space,
    synthesize_stream,
    two_view_stream,
    write_stream,
)
from .harness import (
    MethodKind,
    RunConfig,
    RunRecord,
    accuracy,
    best_switch_loss,
    check_bounds,
    combine_loss_bound,
    run_method,
    switch_loss_bound,
)
from . import backends

__version__ = "0.1.0"
