"""Command-line interface: synth, run, report, check.

Exit codes: 0 success, 1 a deterministic loss guarantee was violated,
2 input or format error.
"""

from __future__ import annotations

import os
import sys
from collections import defaultdict
from dataclasses import replace
from functools import wraps

import click
import numpy as np

from .. import backends
from ..core import FeslError, Task
from ..streams import (
    load_batch,
    read_stream,
    generated_stream,
    synthesize_stream,
    two_view_stream,
    write_stream,
)
from .bounds import check_bounds, switch_loss_bound
from .presets import step_scale_for
from .records import read_records_dir, record_filename, write_record
from .run import MethodKind, RunConfig, run_method


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FeslError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
def main():
    """Streaming learning across an evolving feature space."""


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              help="Batch dataset for the first feature space.")
@click.option("--format", "fmt", type=click.Choice(["csv", "svm"]), default="csv",
              show_default=True, help="Input file format.")
@click.option("--generate", nargs=2, type=int, metavar="N D1", default=None,
              help="Skip --input: generate N rows with D1 teacher-labelled features.")
@click.option("--second", type=click.Path(exists=True, dir_okay=False),
              help="Second-view file (same format); disables Gaussian synthesis.")
@click.option("--d2", type=int, default=None,
              help="Dimension of the synthesized second space.")
@click.option("--seed", type=int, required=True, help="Master seed for the stream.")
@click.option("--task", type=click.Choice(["classification", "regression"]),
              default="classification", show_default=True)
@click.option("--dim", type=int, default=None, help="Declared dimension for svm input.")
@click.option("--name", default=None, help="Stream name (defaults to the input stem).")
@click.option("--t1", type=int, default=None, help="Rounds in the old space.")
@click.option("--t2", type=int, default=None, help="Rounds in the new space.")
@click.option("--b", type=int, default=None, help="Overlap rounds.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Stream file to write.")
@_guarded
def synth(input_path, fmt, generate, second, d2, seed, task, dim, name, t1, t2, b, out):
    """Build a cycle stream and dump it to a file."""
    task = Task(task)
    if generate is not None:
        if input_path or second:
            raise click.UsageError("--generate excludes --input/--second")
        if d2 is None:
            raise click.UsageError("--generate needs --d2")
        n, d1 = generate
        stream = generated_stream(n, d1, d2, seed, task=task,
                                  name=name or "generated", b=b, t1=t1, t2=t2)
    elif input_path is None:
        raise click.UsageError("give --input or --generate")
    else:
        stem = os.path.splitext(os.path.basename(input_path))[0]
        features, labels, _ = load_batch(input_path, fmt, task=task, dim=dim)
        if second is not None:
            second_features, second_labels, _ = load_batch(second, fmt, task=task, dim=dim)
            if not np.array_equal(labels, second_labels):
                raise click.UsageError("the two views carry different labels")
            stream = two_view_stream(features, second_features, labels, task,
                                     seed, name=name or stem, b=b, t1=t1, t2=t2)
        else:
            if d2 is None:
                raise click.UsageError("--d2 is required to synthesize a second space")
            stream = synthesize_stream(features, labels, task, d2, seed,
                                       name=name or stem, b=b, t1=t1, t2=t2)
    write_stream(stream, out)
    s = stream.schedule
    click.echo(f"wrote {out}: {stream.name}, t1={s.t1} t2={s.t2} b={s.b} "
               f"d1={s.d1} d2={s.d2} seed={stream.seed}")


@main.command()
@click.option("--stream", "stream_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Stream file from `synth`.")
@click.option("--methods", default="nogd,rogdu,rogdf,feslc,fesls", show_default=True,
              help="Comma-separated method names.")
@click.option("--seeds", type=int, default=10, show_default=True,
              help="Number of run seeds.")
@click.option("--seed-base", type=int, default=0, show_default=True,
              help="First run seed; runs use seed-base..seed-base+seeds-1.")
@click.option("--c", "step_scale", type=float, default=None,
              help="Step-size scale; defaults to the dataset preset, else 1.")
@click.option("--radius", type=float, default=100.0, show_default=True)
@click.option("--ridge", type=float, default=1e-3, show_default=True)
@click.option("--clip", type=click.Choice(["on", "off"]), default="on",
              show_default=True, help="Clip losses to [0,1] for weight updates.")
@click.option("--backend", type=click.Choice(["python", "compiled"]), default=None,
              help="Force a compute backend (default: best available).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="Directory for record files.")
@_guarded
def run(stream_path, methods, seeds, seed_base, step_scale, radius, ridge, clip,
        backend, out_dir):
    """Run methods over a stream and write one record file per run."""
    stream = read_stream(stream_path)
    kinds = [MethodKind.parse(tok) for tok in methods.split(",") if tok.strip()]
    if not kinds:
        raise click.UsageError("no methods given")
    if step_scale is None:
        step_scale = step_scale_for(stream.name)
    config = RunConfig(step_scale=step_scale, radius=radius, ridge=ridge,
                       clip_losses=clip == "on", backend=backend)
    os.makedirs(out_dir, exist_ok=True)
    for method in kinds:
        for seed in range(seed_base, seed_base + seeds):
            record = run_method(stream, method, replace(config, seed=seed))
            write_record(record, os.path.join(out_dir, record_filename(record)))
    click.echo(f"wrote {len(kinds) * seeds} records to {out_dir} "
               f"(backend={backend or backends.active_backend()}, c={step_scale})")


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="Directory of record files.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Aggregate table file (TSV).")
@click.option("--trend-out", type=click.Path(dir_okay=False), default=None,
              help="Loss-trend CSV (default: <out>.trend.csv).")
@_guarded
def report(in_dir, out_path, trend_out):
    """Aggregate accuracy and loss across runs; emit plot-ready trends."""
    records = read_records_dir(in_dir)
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.stream_name, rec.method)].append(rec)
    with open(out_path, "w", newline="\n") as fh:
        fh.write("stream\tmethod\truns\taccuracy_mean\taccuracy_std\t"
                 "final_avg_loss_mean\tfinal_avg_loss_std\n")
        for (stream_name, method) in sorted(groups, key=lambda k: (k[0], k[1].value)):
            runs = groups[(stream_name, method)]
            finals = np.array([rec.avg_cum_loss[-1] for rec in runs])
            accs = [rec.accuracy for rec in runs if rec.accuracy is not None]
            acc_mean = f"{np.mean(accs):.4f}" if accs else "-"
            acc_std = f"{np.std(accs, ddof=1):.4f}" if len(accs) > 1 else (
                "0.0000" if accs else "-")
            loss_std = (f"{np.std(finals, ddof=1):.6f}" if len(finals) > 1
                        else "0.000000")
            fh.write(f"{stream_name}\t{method.display}\t{len(runs)}\t"
                     f"{acc_mean}\t{acc_std}\t{np.mean(finals):.6f}\t{loss_std}\n")
    trend_out = trend_out or out_path + ".trend.csv"
    with open(trend_out, "w", newline="\n") as fh:
        fh.write("stream,method,round,avg_cum_loss_mean\n")
        for (stream_name, method) in sorted(groups, key=lambda k: (k[0], k[1].value)):
            runs = groups[(stream_name, method)]
            trend = np.mean([rec.avg_cum_loss for rec in runs], axis=0)
            for i, value in enumerate(trend.tolist(), start=1):
                fh.write(f"{stream_name},{method.display},{i},{value:.8f}\n")
    click.echo(f"wrote {out_path} and {trend_out}")


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="Directory of record files.")
@_guarded
def check(in_dir):
    """Verify loss guarantees; exit 1 on a deterministic violation."""
    records = read_records_dir(in_dir)
    ensemble_records = [r for r in records
                        if r.method in (MethodKind.FESL_C, MethodKind.FESL_S)]
    if not ensemble_records:
        click.echo("no feslc/fesls records to check", err=True)
        sys.exit(2)
    violations = 0
    select_groups = defaultdict(list)
    for rec in ensemble_records:
        rep = check_bounds(rec)
        click.echo(rep.line())
        if rep.deterministic and not rep.passed:
            violations += 1
        if rec.method is MethodKind.FESL_S:
            select_groups[rec.stream_name].append(rep)
    for stream_name, reps in sorted(select_groups.items()):
        mean_slack = float(np.mean([r.slack for r in reps]))
        t2 = reps[0].t2
        allowance = 0.05 * t2
        status = "PASS" if mean_slack <= allowance else "ABOVE"
        click.echo(f"{status} {stream_name} FESL-s mean over {len(reps)} seeds: "
                   f"slack={mean_slack:+.4f} allowance={allowance:.4f} "
                   f"(expected-loss guarantee, bound={switch_loss_bound(t2):.4f})")
    if violations:
        click.echo(f"{violations} deterministic bound violation(s)", err=True)
        sys.exit(1)
    click.echo("all deterministic bounds hold")
