"""Command-line surface: serve, submit, identify, list, bench.

Exit codes: 0 success, 2 usage error (click's own), 3 not found
(unknown model, or nothing registered to identify against), 4 invalid
input (validation, malformed or duplicate spec). GMI_ROOT supplies the
default registry root.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click

from gmi import __version__
from gmi.bench.harness import (
    DEFAULT_GAMMA_GRID,
    BenchmarkConfig,
    build_benchmark,
    gamma_sweep,
    report_json,
    report_table,
    run_benchmark,
    sweep_csv,
)
from gmi.errors import (
    DuplicateModelError,
    EmptyRegistryError,
    SpecFormatError,
    SpecVersionError,
    StorageError,
    UnknownModelError,
    ValidationError,
)
from gmi.identification import STRATEGY_VARIANTS, ScoringStrategy
from gmi.kernel import KernelParams
from gmi.registry import Registry
from gmi.requirement import deserialize_requirement
from gmi.spec import deserialize_spec

_root_option = click.option(
    "--root", envvar="GMI_ROOT", required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Registry root directory (env: GMI_ROOT).")


def _guarded(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (UnknownModelError, EmptyRegistryError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except (ValidationError, SpecFormatError, SpecVersionError,
                DuplicateModelError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
        except StorageError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="gmi")
def main():
    """Generative-model identification over embedding specifications."""


@main.command()
@_root_option
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="host:port to bind.")
@_guarded
def serve(root: Path, listen: str):
    """Run the HTTP service over the registry at --root."""
    import uvicorn

    from gmi.service import create_app

    host, _, port_s = listen.rpartition(":")
    if not host or not port_s.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    app = create_app(Registry(root))
    uvicorn.run(app, host=host, port=int(port_s), log_level="info")


@main.command()
@_root_option
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False,
                                             path_type=Path))
@click.option("--replace", is_flag=True,
              help="Version-bump an already registered model id.")
@_guarded
def submit(root: Path, spec_file: Path, replace: bool):
    """Validate and register a spec document."""
    spec = deserialize_spec(spec_file.read_bytes())
    model_id = Registry(root).submit_model(spec, replace=replace)
    click.echo(model_id)


@main.command()
@_root_option
@click.argument("req_file", type=click.Path(exists=True, dir_okay=False,
                                            path_type=Path))
@click.option("--strategy", default="weighted", show_default=True,
              type=click.Choice(STRATEGY_VARIANTS))
@click.option("--gamma", default=0.02, show_default=True, type=float)
@click.option("--k", default=None, type=int, help="Truncate to the best k.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@_guarded
def identify(root: Path, req_file: Path, strategy: str, gamma: float,
             k: int | None, as_json: bool):
    """Rank registered models against a requirement document."""
    registry = Registry(root)
    image_dim, prompt_dim = (
        (None, None) if strategy == "download" else registry.schema)
    req = deserialize_requirement(req_file.read_bytes(),
                                  image_dim=image_dim, prompt_dim=prompt_dim)
    if not gamma > 0:
        raise ValidationError(f"--gamma must be positive, got {gamma}")
    ranking = registry.identify(
        req, ScoringStrategy(variant=strategy, kernel=KernelParams(gamma)), k=k)
    if as_json:
        click.echo(json.dumps({
            "strategy": strategy,
            "gamma": gamma,
            "entries": [
                {"model_id": e.model_id, "distance": e.distance,
                 "similarity": e.similarity, "rank": e.rank}
                for e in ranking.entries
            ],
        }))
        return
    click.echo(f"{'rank':>4}  {'model_id':<24}  {'distance':<24}  similarity")
    for e in ranking.entries:
        click.echo(f"{e.rank:>4}  {e.model_id:<24}  {e.distance!r:<24}  "
                   f"{e.similarity!r}")


@main.command("list")
@_root_option
@_guarded
def list_cmd(root: Path):
    """List registered models in insertion order."""
    for row in Registry(root).list_models():
        click.echo(f"{row['model_id']}\t{row['n_samples']}\t"
                   f"{row['download_count']}")


def _load_bench_config(path: Path | None):
    if path is None:
        return BenchmarkConfig(), {}
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"bad bench config {path}: {exc}") from exc
    field_names = {f.name for f in dataclasses.fields(BenchmarkConfig)}
    extras = {"gamma", "gammas", "strategies"}
    unknown = set(doc) - field_names - extras
    if unknown:
        raise ValidationError(f"unknown bench config keys: {sorted(unknown)}")
    cfg = BenchmarkConfig(**{k: v for k, v in doc.items() if k in field_names})
    return cfg, {k: doc[k] for k in extras if k in doc}


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="TOML with BenchmarkConfig fields (+ gamma/gammas/strategies).")
@click.option("--out", "out_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Write the JSON report here.")
@click.option("--strategies", default=None,
              help="Comma-separated strategy variants.")
@click.option("--gamma", default=None, type=float)
@click.option("--gamma-sweep", "do_sweep", is_flag=True,
              help="Sweep gamma for one strategy; emits CSV plot data.")
@_guarded
def bench(config_path, out_path, strategies, gamma, do_sweep):
    """Build the synthetic benchmark and report metrics."""
    cfg, extras = _load_bench_config(config_path)
    chosen = (strategies.split(",") if strategies
              else extras.get("strategies") or list(("download", "rkme-embed", "weighted")))
    chosen = [s.strip() for s in chosen if s.strip()]
    for s in chosen:
        if s not in STRATEGY_VARIANTS:
            raise ValidationError(
                f"strategy must be one of {STRATEGY_VARIANTS}, got {s!r}")
    g = gamma if gamma is not None else extras.get("gamma", 0.02)
    if not float(g) > 0:
        raise ValidationError(f"gamma must be positive, got {g}")

    specs, tasks = build_benchmark(cfg)
    if do_sweep:
        if len(chosen) != 1:
            raise click.UsageError("--gamma-sweep needs exactly one strategy")
        gammas = extras.get("gammas", list(DEFAULT_GAMMA_GRID))
        sweep = gamma_sweep(specs, tasks, strategy=chosen[0], gammas=gammas)
        reports = {f"{label}@{gv}": rep
                   for gv, rep in sweep
                   for label in (chosen[0],)}
        click.echo(report_table(reports))
        csv_text = sweep_csv(sweep)
        if out_path is not None:
            out_path.write_text(report_json(
                reports, extra={"sweep": True, "strategy": chosen[0]}),
                encoding="utf-8")
            csv_path = out_path.with_suffix(".csv")
            csv_path.write_text(csv_text, encoding="utf-8")
            click.echo(f"wrote {out_path} and {csv_path}")
        else:
            click.echo(csv_text, nl=False)
        return

    reports = run_benchmark(specs, tasks, strategies=chosen, gamma=float(g))
    click.echo(report_table(reports))
    if out_path is not None:
        out_path.write_text(report_json(reports), encoding="utf-8")
        click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
