"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, build, detect, track,
resurgence, report, synth) plus `run` for the whole thing. A JSON config
file supplies values that explicit flags override; the manifest a run
writes uses the same keys, so `run --config run_manifest.json` reproduces
it. Exit codes: 0 success, 1 input error, 2 internal error.
"""

from __future__ import annotations

import json
import sys
from datetime import timedelta
from pathlib import Path

import click

from . import __version__
from .chronnet import build_snapshots, radius_filter, read_snapshots, write_snapshots
from .errors import InputError
from .events import (
    filter_events,
    order_events,
    parse_events,
    parse_utc,
    write_events_csv,
)
from .grid import DEFAULT_BOX, GridSpec, StudyBox
from .pipeline import (
    PipelineConfig,
    RunArtifacts,
    detect_all,
    effective_partitions,
    partitions_from_payload,
    partitions_payload,
    resolve_t0,
    resurgence_payload,
    run_pipeline,
    tracking_from_payload,
    tracking_payload,
    write_reports,
)
from .synth import generate_events, load_patterns, write_truth_json
from .tracking import ResurgenceLink, build_timelines, find_resurgences, resurgent_threads


def parse_bbox(text: str) -> StudyBox:
    try:
        lon_min, lat_min, lon_max, lat_max = (float(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"bbox must be lonmin,latmin,lonmax,latmax, got {text!r}") from None
    return StudyBox(lon_min, lon_max, lat_min, lat_max)


def parse_grid_size(text: str) -> tuple[int, int]:
    try:
        rows, cols = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise InputError(f"grid must be ROWSxCOLS, got {text!r}") from None
    if rows < 1 or cols < 1:
        raise InputError(f"grid dimensions must be positive, got {text!r}")
    return rows, cols


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {p}")
    try:
        with open(p) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config file must hold a JSON object")
    return data


def merged_params(ctx: click.Context) -> dict:
    """Parsed params, with config-file values filling any left at default."""
    config = ctx.obj.get("config", {}) if ctx.obj else {}
    params = dict(ctx.params)
    for name in params:
        if name in config and ctx.get_parameter_source(name) == click.core.ParameterSource.DEFAULT:
            params[name] = config[name]
    return params


def _pipeline_config(p: dict) -> PipelineConfig:
    bbox = parse_bbox(p["bbox"]) if p.get("bbox") else DEFAULT_BOX
    rows, cols = parse_grid_size(p["grid"]) if p.get("grid") else (30, 30)
    return PipelineConfig(
        events_path=str(p.get("events") or ""),
        events_format=p.get("format") or "plain",
        strict=not p.get("lenient", False),
        bbox=bbox,
        rows=rows,
        cols=cols,
        min_confidence=p.get("min_confidence", 70.0),
        confidence_inclusive=not p.get("confidence_exclusive", False),
        t0=parse_utc(p["t0"]) if p.get("t0") else None,
        dt_days=p.get("dt_days", 7.0),
        radius=p.get("radius"),
        drop_self_loops=p.get("drop_self_loops", False),
        louvain_seed=p.get("louvain_seed", 0),
        q_threshold=p.get("q_threshold", 0.3),
        exclude_invalid=p.get("exclude_invalid", False),
        match_theta=p.get("match_theta", 0.3),
        theta=p.get("theta", 0.9),
        jaccard=p.get("jaccard", "binary"),
        kappa=p.get("kappa", 0.8),
        k_max=p.get("kmax", 4),
        jobs=p.get("jobs", 1),
        figures=p.get("figures", True),
        max_presence=p.get("max_presence", 16),
        graphml=p.get("graphml", False),
    )


def _dump(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path: str, kind: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{kind} file not found: {p}")
    with open(p) as fh:
        return json.load(fh)


def _open_input(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"events file not found: {p}")
    return open(p, newline="")


@click.group(name="chrontrack")
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=str, default=None, help="JSON config merged under explicit flags.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None) -> None:
    """Chronological-network community dynamics for geolocated event streams."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_config_file(config_path)


_bbox_option = click.option("--bbox", default="-70,-15,-50,5", show_default=True, help="lonmin,latmin,lonmax,latmax")
_grid_option = click.option("--grid", default="30x30", show_default=True, help="ROWSxCOLS")
_format_option = click.option(
    "--format", "format", default="plain", type=click.Choice(["plain", "modis"]), show_default=True
)


@cli.command()
@click.argument("events", type=str)
@click.option("--out", required=True, type=str, help="Destination CSV (canonical format).")
@_format_option
@_bbox_option
@click.option("--min-confidence", default=70.0, show_default=True)
@click.option("--confidence-exclusive", is_flag=True, help="Require confidence strictly above the threshold.")
@click.option("--lenient", is_flag=True, help="Skip malformed rows instead of aborting.")
@click.pass_context
def ingest(ctx, **_kwargs):
    """Parse, validate, filter, and chronologically order an event CSV."""
    p = merged_params(ctx)
    with _open_input(p["events"]) as fh:
        parsed = parse_events(fh, fmt=p["format"], strict=not p["lenient"])
    filtered = filter_events(
        parsed.events,
        box=parse_bbox(p["bbox"]),
        min_confidence=p["min_confidence"],
        inclusive=not p["confidence_exclusive"],
    )
    ordered = order_events(filtered.events)
    with open(p["out"], "w", newline="") as fh:
        n = write_events_csv(ordered, fh)
    click.echo(
        f"parsed {len(parsed.events)} rows ({len(parsed.errors)} skipped), dropped "
        f"{filtered.dropped_confidence} low-confidence and {filtered.dropped_outside_box} "
        f"outside the box; wrote {n} events to {p['out']}"
    )


@cli.command()
@click.argument("events", type=str)
@click.option("--outdir", required=True, type=str)
@click.option("--t0", default=None, help="Window origin (ISO instant, UTC). Default: first event's midnight.")
@click.option("--dt-days", default=7.0, show_default=True)
@_bbox_option
@_grid_option
@click.option("--radius", default=None, type=int, help="Keep only edges within this Manhattan distance.")
@click.option("--drop-self-loops", is_flag=True)
@click.option("--graphml", is_flag=True, help="Also write GraphML per snapshot.")
@click.pass_context
def build(ctx, **_kwargs):
    """Build chronological-network snapshots from an event CSV."""
    p = merged_params(ctx)
    cfg = _pipeline_config(p)
    with _open_input(p["events"]) as fh:
        parsed = parse_events(fh)
    events = order_events(parsed.events)
    if not events:
        raise InputError("no events to build snapshots from")
    t0 = resolve_t0(cfg, events)
    snapshots = build_snapshots(events, cfg.grid, t0, cfg.dt, drop_self_loops=cfg.drop_self_loops)
    if cfg.radius is not None:
        snapshots = [radius_filter(s, cfg.grid, cfg.radius) for s in snapshots]
    write_snapshots(snapshots, cfg.grid, t0, cfg.dt, p["outdir"], graphml=p["graphml"])
    click.echo(f"wrote {len(snapshots)} snapshots to {p['outdir']}")


@cli.command()
@click.argument("snapdir", type=str)
@click.option("--out", required=True, type=str)
@click.option("--louvain-seed", default=0, show_default=True)
@click.option("--q-threshold", default=0.3, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.pass_context
def detect(ctx, **_kwargs):
    """Detect communities in every snapshot of a snapshot directory."""
    p = merged_params(ctx)
    snapshots, grid, t0, dt = read_snapshots(p["snapdir"])
    cfg = PipelineConfig(
        bbox=grid.box,
        rows=grid.rows,
        cols=grid.cols,
        t0=t0,
        dt_days=dt / timedelta(days=1),
        radius=snapshots[0].radius if snapshots else None,
        louvain_seed=p["louvain_seed"],
        q_threshold=p["q_threshold"],
        jobs=p["jobs"],
    )
    partitions = detect_all(snapshots, order_seed=cfg.louvain_seed, jobs=cfg.jobs)
    _dump(partitions_payload(partitions, cfg), p["out"])
    n_valid = sum(1 for pt in partitions if pt.q is not None and pt.q > cfg.q_threshold)
    click.echo(f"detected communities in {len(partitions)} snapshots ({n_valid} above Q threshold)")


def _config_from_meta(meta: dict, **overrides) -> PipelineConfig:
    lon_min, lat_min, lon_max, lat_max = meta["grid"]["bbox"]
    return PipelineConfig(
        bbox=StudyBox(lon_min, lon_max, lat_min, lat_max),
        rows=meta["grid"]["rows"],
        cols=meta["grid"]["cols"],
        t0=parse_utc(meta["t0"]) if meta.get("t0") else None,
        dt_days=meta["dt_days"],
        radius=meta.get("radius"),
        **overrides,
    )


@cli.command()
@click.argument("partitions_file", type=str)
@click.option("--out", required=True, type=str)
@click.option("--match-theta", default=0.3, show_default=True)
@click.option("--exclude-invalid", is_flag=True, help="Drop partitions below the Q threshold from tracking.")
@click.pass_context
def track(ctx, **_kwargs):
    """Match communities across adjacent snapshots into timelines."""
    p = merged_params(ctx)
    payload = _load_json(p["partitions_file"], "partitions")
    partitions, meta = partitions_from_payload(payload)
    cfg = _config_from_meta(
        meta,
        match_theta=p["match_theta"],
        exclude_invalid=p["exclude_invalid"],
        q_threshold=payload.get("q_threshold", 0.3),
    )
    tracked = build_timelines(effective_partitions(partitions, cfg), cfg.match_theta)
    _dump(tracking_payload(tracked, cfg, partitions), p["out"])
    click.echo(f"built {len(tracked.timelines)} timelines, {len(tracked.events)} lifecycle events")


@cli.command()
@click.argument("partitions_file", type=str)
@click.argument("timelines_file", type=str)
@click.option("--out", required=True, type=str)
@click.option("--theta", default=0.9, show_default=True)
@click.option("--jaccard", default="binary", type=click.Choice(["binary", "weighted"]), show_default=True)
@click.option("--kappa", default=0.8, show_default=True)
@click.option("--kmax", default=4, show_default=True)
@click.pass_context
def resurgence(ctx, **_kwargs):
    """Find communities that vanish and come back (gap of 2+ snapshots)."""
    p = merged_params(ctx)
    partitions, meta = partitions_from_payload(_load_json(p["partitions_file"], "partitions"))
    tracked = tracking_from_payload(_load_json(p["timelines_file"], "timelines"))
    cfg = _config_from_meta(
        meta, theta=p["theta"], jaccard=p["jaccard"], kappa=p["kappa"], k_max=p["kmax"]
    )
    links = find_resurgences(
        tracked, partitions, cfg.grid, theta=cfg.theta, mode=cfg.jaccard, kappa=cfg.kappa, k_max=cfg.k_max
    )
    payload = resurgence_payload(links, tracked, cfg)
    _dump(payload, p["out"])
    counts = payload["counts"]
    click.echo(
        f"found {counts['links']} resurgence links across {counts['resurgent_timelines']} timelines"
    )


@cli.command()
@click.argument("partitions_file", type=str)
@click.argument("timelines_file", type=str)
@click.option("--resurgences", "resurgences_file", default=None, type=str)
@click.option("--outdir", required=True, type=str)
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--max-presence", default=16, show_default=True)
@click.pass_context
def report(ctx, **_kwargs):
    """Write calendar tables (CSV) and heatmap figures (PNG)."""
    p = merged_params(ctx)
    partitions, meta = partitions_from_payload(_load_json(p["partitions_file"], "partitions"))
    tracked = tracking_from_payload(_load_json(p["timelines_file"], "timelines"))
    cfg = _config_from_meta(meta, figures=p["figures"], max_presence=p["max_presence"])
    if cfg.t0 is None:
        raise InputError("partitions file carries no window origin (t0)")
    links = []
    if p["resurgences_file"]:
        res_payload = _load_json(p["resurgences_file"], "resurgences")
        links = [
            ResurgenceLink(
                snapshot=lk["snapshot"],
                community=lk["community"],
                chain=lk["chain"],
                matched_snapshot=lk["matched_snapshot"],
                matched_community=lk["matched_community"],
                matched_chain=lk["matched_chain"],
                gap=lk["gap"],
                period=lk["period"],
                similarity=lk["similarity"],
            )
            for lk in res_payload["links"]
        ]
    artifacts = RunArtifacts(outdir=Path(p["outdir"]), config=cfg)
    artifacts.partitions = partitions
    artifacts.tracking = tracked
    artifacts.links = links
    Path(p["outdir"]).mkdir(parents=True, exist_ok=True)
    write_reports(artifacts)
    click.echo(f"wrote reports to {Path(p['outdir']) / 'reports'}")


@cli.command()
@click.option("--patterns", "patterns_file", required=True, type=str)
@click.option("--years", default=3, show_default=True)
@click.option("--noise", default=0.0, show_default=True, help="Expected noise events per week.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=str)
@click.option("--truth-out", default=None, type=str)
@_bbox_option
@_grid_option
@click.pass_context
def synth(ctx, **_kwargs):
    """Generate a synthetic event stream with planted seasonal communities."""
    p = merged_params(ctx)
    grid = GridSpec(parse_bbox(p["bbox"]), *parse_grid_size(p["grid"]))
    patterns = load_patterns(p["patterns_file"])
    result = generate_events(patterns, years=p["years"], grid=grid, noise_rate=p["noise"], seed=p["seed"])
    with open(p["out"], "w", newline="") as fh:
        n = write_events_csv(result.events, fh)
    if p["truth_out"]:
        write_truth_json(result, p["truth_out"])
    click.echo(f"wrote {n} synthetic events to {p['out']}")


@cli.command()
@click.argument("events", type=str, required=False, default=None)
@click.option("--outdir", required=True, type=str)
@_format_option
@click.option("--lenient", is_flag=True)
@_bbox_option
@_grid_option
@click.option("--min-confidence", default=70.0, show_default=True)
@click.option("--confidence-exclusive", is_flag=True)
@click.option("--t0", default=None)
@click.option("--dt-days", default=7.0, show_default=True)
@click.option("--radius", default=None, type=int)
@click.option("--drop-self-loops", is_flag=True)
@click.option("--louvain-seed", default=0, show_default=True)
@click.option("--q-threshold", default=0.3, show_default=True)
@click.option("--exclude-invalid", is_flag=True)
@click.option("--match-theta", default=0.3, show_default=True)
@click.option("--theta", default=0.9, show_default=True)
@click.option("--jaccard", default="binary", type=click.Choice(["binary", "weighted"]), show_default=True)
@click.option("--kappa", default=0.8, show_default=True)
@click.option("--kmax", default=4, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--max-presence", default=16, show_default=True)
@click.option("--graphml", is_flag=True)
@click.pass_context
def run(ctx, **_kwargs):
    """Run the full pipeline and write every artifact under --outdir."""
    p = merged_params(ctx)
    if not p.get("events"):
        raise InputError("an events CSV is required (argument or config key 'events')")
    cfg = _pipeline_config(p)
    artifacts = run_pipeline(cfg, p["outdir"])
    threads = resurgent_threads(artifacts.tracking, artifacts.links)
    click.echo(
        f"pipeline complete: {len(artifacts.snapshots)} snapshots, "
        f"{len(artifacts.links)} resurgence links across {len(threads)} timelines; "
        f"artifacts in {p['outdir']}"
    )


def main(argv: list[str] | None = None) -> int:
    """Entry point with the 0/1/2 exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="chrontrack")
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, never crashes
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
