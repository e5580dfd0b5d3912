"""Plain-text record files: one per (stream, method, seed) run.

The format is line-oriented and self-describing: a header block of
``#key value`` lines, a ``#columns`` declaration, then one row per
evaluation round with ``-`` marking absent fields. Floats are written
with ``repr`` so files are byte-stable and round-trip exactly.
"""

from __future__ import annotations

import os
from typing import Dict, List

import numpy as np

from ..core import FormatError, StreamSchedule, Task
from .run import MethodKind, RunRecord

_COLUMNS = ("round", "f1", "f2", "prediction", "loss_raw", "loss_clipped",
            "loss1_clipped", "loss2_clipped", "alpha1", "choice")


def record_filename(record: RunRecord) -> str:
    return f"{record.stream_name}__{record.method.token}__seed{record.seed}.txt"


def _opt(value) -> str:
    return "-" if value is None else repr(value)


def write_record(record: RunRecord, path) -> None:
    sched = record.schedule
    series: Dict[str, object] = {
        "round": record.rounds,
        "f1": record.f1,
        "f2": record.f2,
        "prediction": record.predictions,
        "loss_raw": record.loss_raw,
        "loss_clipped": record.loss_clipped,
        "loss1_clipped": record.loss1_clipped,
        "loss2_clipped": record.loss2_clipped,
        "alpha1": record.alpha1,
        "choice": record.choice,
    }
    with open(path, "w", newline="\n") as fh:
        fh.write("#fesl-record 1\n")
        fh.write(f"#method {record.method.token}\n")
        fh.write(f"#stream {record.stream_name}\n")
        fh.write(f"#task {record.task.value}\n")
        fh.write(f"#schedule t1={sched.t1} t2={sched.t2} b={sched.b} "
                 f"d1={sched.d1} d2={sched.d2}\n")
        fh.write(f"#seed {record.seed}\n")
        fh.write(f"#config c={record.step_scale!r} radius={record.radius!r} "
                 f"ridge={record.ridge!r} clip={'on' if record.clip_losses else 'off'} "
                 f"rate={_opt(record.rate)} share={_opt(record.share)}\n")
        fh.write(f"#accuracy {_opt(record.accuracy)}\n")
        fh.write(f"#cumloss total={record.cum_loss!r} "
                 f"old={_opt(record.cum_loss_old)} new={_opt(record.cum_loss_new)}\n")
        fh.write("#columns " + " ".join(_COLUMNS) + "\n")
        n = record.rounds.shape[0]
        for i in range(n):
            cells: List[str] = []
            for name in _COLUMNS:
                col = series[name]
                if col is None:
                    cells.append("-")
                elif name in ("round", "choice"):
                    cells.append(str(int(col[i])))
                else:
                    cells.append(repr(float(col[i])))
            fh.write(" ".join(cells) + "\n")


def _parse_opt_float(token: str):
    return None if token == "-" else float(token)


def read_record(path) -> RunRecord:
    headers: Dict[str, str] = {}
    rows: List[List[str]] = []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != "#fesl-record 1":
            raise FormatError(f"{path}: not a fesl record file")
        for ln, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                headers[key] = value
                continue
            cells = line.split(" ")
            if len(cells) != len(_COLUMNS):
                raise FormatError(
                    f"{path}:{ln}: expected {len(_COLUMNS)} columns, got {len(cells)}"
                )
            rows.append(cells)
    try:
        method = MethodKind.parse(headers["method"])
        task = Task(headers["task"])
        sched_parts = dict(kv.split("=") for kv in headers["schedule"].split())
        schedule = StreamSchedule(**{k: int(v) for k, v in sched_parts.items()})
        seed = int(headers["seed"])
        cfg = dict(kv.split("=", 1) for kv in headers["config"].split())
        cum = dict(kv.split("=", 1) for kv in headers["cumloss"].split())
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"{path}: bad or missing header ({exc})") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")

    def column(name, integer=False):
        idx = _COLUMNS.index(name)
        if rows[0][idx] == "-":
            return None
        if integer:
            return np.array([int(r[idx]) for r in rows], dtype=np.int64)
        return np.array([float(r[idx]) for r in rows], dtype=np.float64)

    record = RunRecord(
        method=method, seed=seed, stream_name=headers.get("stream", "stream"),
        task=task, schedule=schedule,
        step_scale=float(cfg["c"]), radius=float(cfg["radius"]),
        ridge=float(cfg["ridge"]), clip_losses=cfg["clip"] == "on",
        rate=_parse_opt_float(cfg["rate"]), share=_parse_opt_float(cfg["share"]),
        rounds=column("round", integer=True),
        predictions=column("prediction"),
        loss_raw=column("loss_raw"),
        loss_clipped=column("loss_clipped"),
        f1=column("f1"), f2=column("f2"),
        loss1_clipped=column("loss1_clipped"),
        loss2_clipped=column("loss2_clipped"),
        alpha1=column("alpha1"), choice=column("choice", integer=True),
        accuracy=_parse_opt_float(headers.get("accuracy", "-")),
    )
    record.finalize()
    stored_total = float(cum["total"])
    if abs(stored_total - record.cum_loss) > 1e-9 * max(1.0, abs(stored_total)):
        raise FormatError(
            f"{path}: stored loss total {stored_total} disagrees with rows"
        )
    return record


def read_records_dir(path) -> List[RunRecord]:
    """All record files under a directory, sorted by filename."""
    names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
    records = []
    for name in names:
        full = os.path.join(path, name)
        try:
            records.append(read_record(full))
        except FormatError:
            with open(full) as fh:
                if fh.readline().strip() == "#fesl-record 1":
                    raise
            # unrelated .txt file, skip it
    if not records:
        raise FormatError(f"{path}: no record files found")
    return records
