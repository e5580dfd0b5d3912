"""Build evolvable streams from batch data.

A cycle is constructed by pairing every sample with representations in two
feature spaces, shuffling once with a seed, and walking the rows through
the old-only / overlap / new-only partition of a schedule. The second
space can come from a second view on disk or be synthesized by pushing the
original features through a random Gaussian matrix.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    FormatError,
    Instance,
    InvalidInputError,
    Label,
    Phase,
    StreamSchedule,
    Task,
)


class Source(Enum):
    SYNTHETIC_GAUSSIAN = "synthetic_gaussian"
    TWO_VIEW = "two_view"
    GENERATED = "generated"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    n: int
    d1: int
    d2: int
    task: Task
    source: Source

    def __post_init__(self):
        if self.n < 1 or self.d1 < 1 or self.d2 < 1:
            raise InvalidInputError("n, d1, d2 must be positive")


# (n, d1, d2) shapes of the small benchmark datasets used by the
# experiment suite; d2 is the width of the synthesized second space.
KNOWN_DATASET_SHAPES = {
    "australian": (690, 42, 29),
    "credit-a": (653, 15, 10),
    "credit-g": (1000, 20, 14),
    "diabetes": (768, 8, 5),
    "dna": (940, 180, 125),
    "german": (1000, 59, 41),
    "kr-vs-kp": (3196, 36, 25),
    "splice": (3175, 60, 42),
    "svmguide3": (1284, 22, 15),
}


@dataclass
class CycleStream:
    """An immutable-by-convention ordered stream over one cycle."""

    schedule: StreamSchedule
    instances: List[Instance]
    seed: int
    task: Task
    name: str = "stream"

    def __post_init__(self):
        if len(self.instances) != self.schedule.total_rounds:
            raise InvalidInputError(
                f"expected {self.schedule.total_rounds} instances, "
                f"got {len(self.instances)}"
            )
        for inst in self.instances:
            if inst.phase is not self.schedule.phase_of(inst.round):
                raise InvalidInputError(
                    f"round {inst.round} tagged {inst.phase}, schedule disagrees"
                )

    # --- dense views used by the runners -------------------------------

    def old_matrix(self) -> np.ndarray:
        """x_old rows for rounds 1..t1 (old-only plus overlap)."""
        return np.ascontiguousarray(
            [inst.x_old for inst in self.instances[: self.schedule.t1]]
        )

    def new_matrix(self) -> np.ndarray:
        """x_new rows for rounds t1+1..t1+t2."""
        return np.ascontiguousarray(
            [inst.x_new for inst in self.instances[self.schedule.t1:]]
        )

    def overlap_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        """(new_rows, old_rows) observed during the overlap."""
        lo, hi = self.schedule.t1 - self.schedule.b, self.schedule.t1
        rows = self.instances[lo:hi]
        return (
            np.ascontiguousarray([inst.x_new for inst in rows]),
            np.ascontiguousarray([inst.x_old for inst in rows]),
        )

    def labels_old_phase(self) -> np.ndarray:
        return np.array([inst.label.value for inst in self.instances[: self.schedule.t1]])

    def labels_new_phase(self) -> np.ndarray:
        return np.array([inst.label.value for inst in self.instances[self.schedule.t1:]])


# --- batch loading ------------------------------------------------------


def _remap_class_labels(values: np.ndarray) -> np.ndarray:
    """Map raw class labels onto {-1, +1}; {0,1} and {1,2} are accepted
    with the smaller value going to -1."""
    distinct = sorted(set(values.tolist()))
    if set(distinct) <= {-1.0, 1.0}:
        return values
    if len(distinct) == 1:
        raise FormatError(f"only one class present: {distinct[0]}")
    if len(distinct) == 2 and distinct in ([0.0, 1.0], [1.0, 2.0]):
        return np.where(values == distinct[0], -1.0, 1.0)
    raise FormatError(
        f"cannot map class labels {distinct} onto {{-1,+1}}"
    )


def load_batch(path, format: str, task: Task = Task.CLASSIFICATION,
               dim: Optional[int] = None, name: Optional[str] = None,
               d2: Optional[int] = None):
    """Load a batch dataset as (features, labels, DatasetSpec).

    ``csv``: comma-separated, last column is the label.
    ``svm``: sparse `label idx:val ...` lines with 1-based indices; the
    feature count comes from ``dim`` or, absent that, the largest index.
    """
    if format not in ("csv", "svm", "sparse_svm"):
        raise InvalidInputError(f"unknown format {format!r}")
    rows, labels = [], []
    with open(path) as fh:
        lines = fh.read().splitlines()
    if format == "csv":
        width = None
        for ln, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
                if width < 2:
                    raise FormatError(f"{path}:{ln}: need features and a label")
            elif len(parts) != width:
                raise FormatError(
                    f"{path}:{ln}: ragged row ({len(parts)} fields, expected {width})"
                )
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
            rows.append(values[:-1])
            labels.append(values[-1])
        if not rows:
            raise FormatError(f"{path}: no data rows")
        features = np.array(rows, dtype=np.float64)
    else:
        entries = []
        max_idx = 0
        for ln, line in enumerate(lines, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
                pairs = []
                for token in parts[1:]:
                    idx_s, val_s = token.split(":", 1)
                    idx = int(idx_s)
                    if idx < 1:
                        raise ValueError(f"index {idx} is not 1-based")
                    pairs.append((idx, float(val_s)))
                    max_idx = max(max_idx, idx)
                entries.append(pairs)
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
        if not entries:
            raise FormatError(f"{path}: no data rows")
        width = dim if dim is not None else max_idx
        if max_idx > width:
            raise FormatError(f"{path}: index {max_idx} exceeds declared dim {width}")
        features = np.zeros((len(entries), width), dtype=np.float64)
        for i, pairs in enumerate(entries):
            for idx, val in pairs:
                features[i, idx - 1] = val
    labels = np.array(labels, dtype=np.float64)
    if not np.all(np.isfinite(features)):
        raise FormatError(f"{path}: non-finite feature values")
    if task is Task.CLASSIFICATION:
        labels = _remap_class_labels(labels)
    spec = DatasetSpec(
        name=name or str(path),
        n=features.shape[0],
        d1=features.shape[1],
        d2=d2 if d2 is not None else features.shape[1],
        task=task,
        source=Source.SYNTHETIC_GAUSSIAN,
    )
    return features, labels, spec


# --- second-space synthesis ---------------------------------------------


def gaussian_map(d1: int, d2: int, seed: int) -> np.ndarray:
    """The (d1, d2) map with i.i.d. standard normal entries drawn from seed."""
    if d1 < 1 or d2 < 1:
        raise InvalidInputError("dimensions must be positive")
    return np.random.default_rng(seed).standard_normal((d1, d2))


def apply_feature_map(features: np.ndarray, mapping: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.shape[1] != mapping.shape[0]:
        raise InvalidInputError(
            f"feature dim {features.shape[1]} does not match map rows {mapping.shape[0]}"
        )
    return features @ mapping


def synthesize_second_space(features: np.ndarray, d2: int, seed: int) -> np.ndarray:
    """Project features into a second space via a seeded random Gaussian map."""
    features = np.asarray(features, dtype=np.float64)
    return apply_feature_map(features, gaussian_map(features.shape[1], d2, seed))


def generate_teacher_dataset(n: int, d1: int, seed: int,
                             task: Task = Task.CLASSIFICATION,
                             noise: float = 0.0,
                             name: str = "generated"):
    """Standard-normal features labelled by a random unit-norm linear teacher.

    Classification labels are the sign of the teacher score (ties to +1)
    after adding ``noise``-scaled Gaussian perturbation to the score;
    regression labels are the perturbed score itself.
    """
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d1))
    teacher = rng.standard_normal(d1)
    teacher /= math.sqrt(float(teacher @ teacher))
    score = features @ teacher
    if noise > 0:
        score = score + noise * rng.standard_normal(n)
    if task is Task.CLASSIFICATION:
        labels = np.where(score >= 0, 1.0, -1.0)
    else:
        labels = score
    spec = DatasetSpec(name=name, n=n, d1=d1, d2=d1, task=task,
                       source=Source.GENERATED)
    return features, labels, spec


# --- schedules and cycle assembly ---------------------------------------


def default_overlap(n: int, source: Source) -> int:
    """Overlap length defaults: 5 for small synthetic runs, 10 for larger
    ones, 50 for genuine two-view data."""
    if source is Source.TWO_VIEW:
        return 50
    return 5 if n <= 1000 else 10


def default_schedule(n: int, d1: int, d2: int,
                     source: Source = Source.SYNTHETIC_GAUSSIAN,
                     b: Optional[int] = None,
                     t1: Optional[int] = None,
                     t2: Optional[int] = None) -> StreamSchedule:
    """Split roughly half the rows to each phase."""
    t1 = n // 2 if t1 is None else t1
    t2 = n - t1 if t2 is None else t2
    if t1 + t2 > n:
        raise InvalidInputError(f"schedule needs {t1 + t2} rows, dataset has {n}")
    b = default_overlap(n, source) if b is None else b
    return StreamSchedule(t1=t1, t2=t2, b=b, d1=d1, d2=d2)


def build_cycle(features_old: np.ndarray, features_new: np.ndarray,
                labels: Sequence[float], schedule: StreamSchedule, seed: int,
                task: Task = Task.CLASSIFICATION,
                name: str = "stream") -> CycleStream:
    """Shuffle the batch once with the seed and lay it out over the cycle.

    Row i of both feature matrices must describe the same sample.
    """
    features_old = np.asarray(features_old, dtype=np.float64)
    features_new = np.asarray(features_new, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = features_old.shape[0]
    if features_new.shape[0] != n or labels.shape[0] != n:
        raise InvalidInputError("feature matrices and labels must align row-wise")
    if n < schedule.total_rounds:
        raise InvalidInputError(
            f"schedule needs {schedule.total_rounds} rows, got {n}"
        )
    if features_old.shape[1] != schedule.d1 or features_new.shape[1] != schedule.d2:
        raise InvalidInputError("feature dims do not match the schedule")
    order = np.random.default_rng(seed).permutation(n)[: schedule.total_rounds]
    instances = []
    for pos, row in enumerate(order.tolist()):
        rnd = pos + 1
        phase = schedule.phase_of(rnd)
        instances.append(Instance(
            round=rnd,
            phase=phase,
            x_old=features_old[row].copy() if phase is not Phase.NEW_ONLY else None,
            x_new=features_new[row].copy() if phase is not Phase.OLD_ONLY else None,
            label=Label(float(labels[row]), task),
        ))
    return CycleStream(schedule=schedule, instances=instances, seed=seed,
                       task=task, name=name)


def derived_seed(seed: int, label: str) -> int:
    """A stable sub-seed for one named consumer of a master seed."""
    return int(np.random.SeedSequence(
        [seed, zlib.crc32(label.encode())]
    ).generate_state(1)[0])


def synthesize_stream(features, labels, task: Task, d2: int, seed: int,
                      name: str = "stream",
                      source: Source = Source.SYNTHETIC_GAUSSIAN,
                      b: Optional[int] = None, t1: Optional[int] = None,
                      t2: Optional[int] = None) -> CycleStream:
    """One-stop builder: Gaussian second space, default schedule, shuffle.

    The Gaussian map and the shuffle use distinct sub-seeds derived from
    the one master seed, which is what the stream records.
    """
    features = np.asarray(features, dtype=np.float64)
    second = apply_feature_map(
        features, gaussian_map(features.shape[1], d2, derived_seed(seed, "map"))
    )
    schedule = default_schedule(features.shape[0], features.shape[1], d2,
                                source=source, b=b, t1=t1, t2=t2)
    stream = build_cycle(features, second, labels, schedule,
                         seed=derived_seed(seed, "shuffle"), task=task, name=name)
    stream.seed = seed
    return stream


def two_view_stream(features_old, features_new, labels, task: Task, seed: int,
                    name: str = "stream", b: Optional[int] = None,
                    t1: Optional[int] = None, t2: Optional[int] = None) -> CycleStream:
    """Cycle over two pre-existing views of the same samples."""
    features_old = np.asarray(features_old, dtype=np.float64)
    features_new = np.asarray(features_new, dtype=np.float64)
    schedule = default_schedule(features_old.shape[0], features_old.shape[1],
                                features_new.shape[1], source=Source.TWO_VIEW,
                                b=b, t1=t1, t2=t2)
    stream = build_cycle(features_old, features_new, labels, schedule,
                         seed=derived_seed(seed, "shuffle"), task=task, name=name)
    stream.seed = seed
    return stream


def generated_stream(n: int, d1: int, d2: int, seed: int,
                     task: Task = Task.CLASSIFICATION, noise: float = 0.0,
                     name: str = "generated", b: Optional[int] = None,
                     t1: Optional[int] = None, t2: Optional[int] = None) -> CycleStream:
    """A fully synthetic stream from a random linear teacher."""
    features, labels, _ = generate_teacher_dataset(
        n, d1, derived_seed(seed, "teacher"), task=task, noise=noise, name=name
    )
    return synthesize_stream(features, labels, task, d2, seed, name=name,
                             source=Source.GENERATED, b=b, t1=t1, t2=t2)


# --- stream files --------------------------------------------------------

_PHASE_CODE = {Phase.OLD_ONLY: "O", Phase.OVERLAP: "V", Phase.NEW_ONLY: "N"}
_CODE_PHASE = {v: k for k, v in _PHASE_CODE.items()}


def _fmt_vec(v: Optional[np.ndarray]) -> str:
    if v is None:
        return ""
    return " ".join(repr(x) for x in v.tolist())


def write_stream(stream: CycleStream, path) -> None:
    """Dump a stream as self-describing text, one record per line."""
    s = stream.schedule
    with open(path, "w") as fh:
        fh.write("#fesl-stream 1\n")
        fh.write(f"#name {stream.name}\n")
        fh.write(f"#task {stream.task.value}\n")
        fh.write(f"#schedule t1={s.t1} t2={s.t2} b={s.b} d1={s.d1} d2={s.d2}\n")
        fh.write(f"#seed {stream.seed}\n")
        for inst in stream.instances:
            fh.write(
                f"{inst.round} {_PHASE_CODE[inst.phase]} {repr(inst.label.value)}"
                f" | {_fmt_vec(inst.x_old)} | {_fmt_vec(inst.x_new)}\n"
            )


def read_stream(path) -> CycleStream:
    """Parse a stream file written by :func:`write_stream`."""
    meta = {}
    instances = []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != "#fesl-stream 1":
            raise FormatError(f"{path}: not a fesl stream file")
        for ln, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                meta[key] = value
                continue
            try:
                head, old_part, new_part = line.split(" | ")
                rnd_s, code, label_s = head.split(" ")
                x_old = (np.array([float(t) for t in old_part.split()])
                         if old_part.strip() else None)
                x_new = (np.array([float(t) for t in new_part.split()])
                         if new_part.strip() else None)
                instances.append((int(rnd_s), _CODE_PHASE[code],
                                  float(label_s), x_old, x_new))
            except (ValueError, KeyError) as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
    try:
        task = Task(meta["task"])
        sched_parts = dict(kv.split("=") for kv in meta["schedule"].split())
        schedule = StreamSchedule(**{k: int(v) for k, v in sched_parts.items()})
        seed = int(meta["seed"])
        name = meta.get("name", "stream")
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"{path}: bad or missing header ({exc})") from None
    built = [
        Instance(round=rnd, phase=phase, x_old=x_old, x_new=x_new,
                 label=Label(value, task))
        for rnd, phase, value, x_old, x_new in instances
    ]
    return CycleStream(schedule=schedule, instances=built, seed=seed,
                       task=task, name=name)
