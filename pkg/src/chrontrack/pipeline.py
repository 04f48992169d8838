"""End-to-end orchestration: ingest -> grid -> snapshots -> communities ->
tracking -> reports, with a manifest that makes every run reproducible.

All artifacts are written with stable ordering and formatting, so two runs
from the same inputs and parameters are byte-identical, in serial or
parallel mode alike.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

from . import chronnet, community, reports, tracking
from .errors import InputError
from .events import filter_events, order_events, parse_events
from .grid import DEFAULT_BOX, GridSpec, StudyBox

MANIFEST_NAME = "run_manifest.json"


@dataclass
class PipelineConfig:
    """Every knob of the pipeline; the manifest records the resolved values."""

    events_path: str = ""
    events_format: str = "plain"
    strict: bool = True
    bbox: StudyBox = DEFAULT_BOX
    rows: int = 30
    cols: int = 30
    min_confidence: float = 70.0
    confidence_inclusive: bool = True
    t0: datetime | None = None
    dt_days: float = 7.0
    radius: int | None = None
    drop_self_loops: bool = False
    louvain_seed: int = 0
    q_threshold: float = 0.3
    exclude_invalid: bool = False
    match_theta: float = 0.3
    theta: float = 0.9
    jaccard: str = "binary"
    kappa: float = 0.8
    k_max: int = 4
    jobs: int = 1
    figures: bool = True
    max_presence: int = 16
    graphml: bool = False

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.bbox, self.rows, self.cols)

    @property
    def dt(self) -> timedelta:
        return timedelta(days=self.dt_days)

    def to_manifest(self) -> dict:
        """Keys match the CLI parameter names, so a manifest is a valid
        --config file; `jobs` is omitted because the execution schedule does
        not affect any artifact."""
        return {
            "events": self.events_path,
            "format": self.events_format,
            "lenient": not self.strict,
            "bbox": f"{self.bbox.lon_min},{self.bbox.lat_min},{self.bbox.lon_max},{self.bbox.lat_max}",
            "grid": f"{self.rows}x{self.cols}",
            "min_confidence": self.min_confidence,
            "confidence_exclusive": not self.confidence_inclusive,
            "t0": None if self.t0 is None else self.t0.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "dt_days": self.dt_days,
            "radius": self.radius,
            "drop_self_loops": self.drop_self_loops,
            "louvain_seed": self.louvain_seed,
            "q_threshold": self.q_threshold,
            "exclude_invalid": self.exclude_invalid,
            "match_theta": self.match_theta,
            "theta": self.theta,
            "jaccard": self.jaccard,
            "kappa": self.kappa,
            "kmax": self.k_max,
            "figures": self.figures,
            "max_presence": self.max_presence,
            "graphml": self.graphml,
        }


@dataclass
class RunArtifacts:
    outdir: Path
    config: PipelineConfig
    snapshots: list[chronnet.Snapshot] = field(default_factory=list)
    partitions: list[community.Partition] = field(default_factory=list)
    tracking: tracking.TrackingResult | None = None
    links: list[tracking.ResurgenceLink] = field(default_factory=list)
    paths: dict[str, str] = field(default_factory=dict)


def _json_dump(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _detect_one(args: tuple[chronnet.Snapshot, int]) -> community.Partition:
    snapshot, seed = args
    return community.detect_communities(snapshot, order_seed=seed)


def detect_all(
    snapshots: Sequence[chronnet.Snapshot], order_seed: int = 0, jobs: int = 1
) -> list[community.Partition]:
    """Per-snapshot detection, optionally fanned out over processes.

    Output is identical regardless of the schedule: detection is
    deterministic and results are collected in snapshot order.
    """
    work = [(s, order_seed) for s in snapshots]
    if jobs <= 1 or len(snapshots) < 2:
        return [_detect_one(w) for w in work]
    import multiprocessing

    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        chunk = max(1, len(work) // (jobs * 4))
        return list(pool.map(_detect_one, work, chunksize=chunk))


# ---------------------------------------------------------------------------
# Stage-output serialization (shared by the staged CLI and the full run)
# ---------------------------------------------------------------------------


def _meta(config: PipelineConfig) -> dict:
    return {
        "grid": {
            "rows": config.rows,
            "cols": config.cols,
            "bbox": [config.bbox.lon_min, config.bbox.lat_min, config.bbox.lon_max, config.bbox.lat_max],
        },
        "t0": None if config.t0 is None else config.t0.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "dt_days": config.dt_days,
        "radius": config.radius,
    }


def partitions_payload(partitions: Sequence[community.Partition], config: PipelineConfig) -> dict:
    return {
        "meta": _meta(config),
        "louvain_seed": config.louvain_seed,
        "q_threshold": config.q_threshold,
        "partitions": [
            {
                "snapshot": p.snapshot_index,
                "Q": p.q,
                "valid": community.validate_partition(p, config.q_threshold),
                "communities": [
                    {"id": cid, "nodes": sorted(nodes)} for cid, nodes in enumerate(p.communities)
                ],
            }
            for p in partitions
        ],
    }


def partitions_from_payload(payload: dict) -> tuple[list[community.Partition], dict]:
    parts = [
        community.Partition(
            snapshot_index=entry["snapshot"],
            communities=tuple(frozenset(c["nodes"]) for c in entry["communities"]),
            q=entry["Q"],
        )
        for entry in payload["partitions"]
    ]
    return parts, payload["meta"]


def tracking_payload(
    result: tracking.TrackingResult,
    config: PipelineConfig,
    partitions: Sequence[community.Partition] = (),
) -> dict:
    nodes_of = {
        (p.snapshot_index, cid): sorted(nodes)
        for p in partitions
        for cid, nodes in enumerate(p.communities)
    }
    return {
        "meta": _meta(config),
        "match_theta": config.match_theta,
        "chains": [
            {
                "chain": tl.chain_id,
                "entries": [
                    {
                        "snapshot": e.snapshot,
                        "community": e.community,
                        "nodes": nodes_of.get((e.snapshot, e.community), []),
                    }
                    for e in tl.entries
                ],
            }
            for tl in result.timelines
        ],
        "events": [
            {
                "kind": ev.kind.value,
                "snapshot": ev.snapshot,
                "predecessors": [[r.snapshot, r.community] for r in ev.predecessors],
                "successors": [[r.snapshot, r.community] for r in ev.successors],
                "similarity": ev.similarity,
            }
            for ev in result.events
        ],
    }


def tracking_from_payload(payload: dict) -> tracking.TrackingResult:
    timelines = []
    chain_of: dict[tracking.CommunityRef, int] = {}
    for entry in payload["chains"]:
        refs = [tracking.CommunityRef(e["snapshot"], e["community"]) for e in entry["entries"]]
        timelines.append(tracking.CommunityTimeline(chain_id=entry["chain"], entries=refs))
        for ref in refs:
            chain_of[ref] = entry["chain"]
    events = [
        tracking.LifecycleEvent(
            kind=tracking.EventKind(ev["kind"]),
            snapshot=ev["snapshot"],
            predecessors=tuple(tracking.CommunityRef(s, c) for s, c in ev["predecessors"]),
            successors=tuple(tracking.CommunityRef(s, c) for s, c in ev["successors"]),
            similarity=ev["similarity"],
        )
        for ev in payload["events"]
    ]
    return tracking.TrackingResult(timelines, events, chain_of)


def resurgence_payload(
    links: Sequence[tracking.ResurgenceLink],
    result: tracking.TrackingResult,
    config: PipelineConfig,
) -> dict:
    threads = tracking.resurgent_threads(result, links)
    return {
        "meta": _meta(config),
        "theta": config.theta,
        "mode": config.jaccard,
        "kappa": config.kappa,
        "k_max": config.k_max,
        "links": [
            {
                "snapshot": lk.snapshot,
                "community": lk.community,
                "chain": lk.chain,
                "matched_snapshot": lk.matched_snapshot,
                "matched_community": lk.matched_community,
                "matched_chain": lk.matched_chain,
                "gap": lk.gap,
                "period": lk.period,
                "similarity": lk.similarity,
            }
            for lk in links
        ],
        "counts": {"links": len(links), "resurgent_timelines": len(threads)},
        "threads": threads,
    }


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


def load_events(config: PipelineConfig):
    path = Path(config.events_path)
    if not path.is_file():
        raise InputError(f"events file not found: {path}")
    with open(path, newline="") as fh:
        parsed = parse_events(fh, fmt=config.events_format, strict=config.strict)
    filtered = filter_events(
        parsed.events,
        box=config.bbox,
        min_confidence=config.min_confidence,
        inclusive=config.confidence_inclusive,
    )
    return order_events(filtered.events), parsed, filtered


def resolve_t0(config: PipelineConfig, events) -> datetime:
    if config.t0 is not None:
        return config.t0
    if not events:
        raise InputError("cannot infer the window origin from an empty event stream")
    first = events[0].timestamp
    return datetime(first.year, first.month, first.day, tzinfo=timezone.utc)


def effective_partitions(
    partitions: Sequence[community.Partition], config: PipelineConfig
) -> list[community.Partition]:
    """With exclude_invalid, snapshots failing the modularity check track as empty."""
    if not config.exclude_invalid:
        return list(partitions)
    return [
        p
        if community.validate_partition(p, config.q_threshold)
        else community.Partition(p.snapshot_index, (), p.q)
        for p in partitions
    ]


def write_reports(artifacts: RunArtifacts) -> None:
    config = artifacts.config
    outdir = artifacts.outdir
    reports_dir = outdir / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    t0, dt = config.t0, config.dt
    assert t0 is not None

    q_table = reports.modularity_table(artifacts.partitions, t0, dt)
    q_csv = reports_dir / "modularity_heatmap.csv"
    reports.write_calendar_csv(q_table, q_csv)
    artifacts.paths["modularity_heatmap"] = str(q_csv)
    if config.figures:
        from .figures import save_calendar_heatmap

        save_calendar_heatmap(
            q_table,
            reports_dir / "modularity_heatmap.png",
            title="Snapshot modularity by week and year",
            cbar_label="modularity",
        )

    assert artifacts.tracking is not None
    threads = tracking.resurgent_threads(artifacts.tracking, artifacts.links)
    chains_by_id = {tl.chain_id: tl for tl in artifacts.tracking.timelines}
    for thread in threads[: config.max_presence]:
        entries: list[tracking.CommunityRef] = []
        for chain in thread:
            entries.extend(chains_by_id[chain].entries)
        entries.sort()
        table = reports.presence_table(entries, artifacts.partitions, t0, dt)
        stem = f"presence_thread_{thread[0]:04d}"
        reports.write_calendar_csv(table, reports_dir / f"{stem}.csv", fmt="int")
        if config.figures:
            from .figures import save_calendar_heatmap

            save_calendar_heatmap(
                table,
                reports_dir / f"{stem}.png",
                title=f"Community presence, thread {thread[0]} (gray = absent)",
                cbar_label="community size (cells)",
                cmap="plasma",
            )


def run_pipeline(config: PipelineConfig, outdir: str | Path) -> RunArtifacts:
    """Execute every stage and write all artifacts under ``outdir``.

    On a stage failure, partial outputs stay on disk next to a
    failure_marker.json naming the stage and error.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = RunArtifacts(outdir=out, config=config)
    stage = "ingest"
    try:
        events, parsed, filtered = load_events(config)
        t0 = resolve_t0(config, events)
        config = replace(config, t0=t0)
        artifacts.config = config
        _json_dump(config.to_manifest(), out / MANIFEST_NAME)
        _json_dump(
            {
                "parsed": len(parsed.events),
                "skipped_rows": len(parsed.errors),
                "dropped_confidence": filtered.dropped_confidence,
                "dropped_outside_box": filtered.dropped_outside_box,
                "kept": len(events),
            },
            out / "ingest_summary.json",
        )

        stage = "chronnet"
        snapshots = chronnet.build_snapshots(
            events, config.grid, t0, config.dt, drop_self_loops=config.drop_self_loops
        )
        if config.radius is not None:
            snapshots = [chronnet.radius_filter(s, config.grid, config.radius) for s in snapshots]
        artifacts.snapshots = snapshots
        snap_dir = out / "snapshots"
        chronnet.write_snapshots(snapshots, config.grid, t0, config.dt, snap_dir, graphml=config.graphml)
        artifacts.paths["snapshots"] = str(snap_dir)

        stage = "community"
        partitions = detect_all(snapshots, order_seed=config.louvain_seed, jobs=config.jobs)
        artifacts.partitions = partitions
        _json_dump(partitions_payload(partitions, config), out / "partitions.json")
        artifacts.paths["partitions"] = str(out / "partitions.json")

        stage = "tracking"
        tracked = tracking.build_timelines(effective_partitions(partitions, config), config.match_theta)
        artifacts.tracking = tracked
        _json_dump(tracking_payload(tracked, config, partitions), out / "timelines.json")
        artifacts.paths["timelines"] = str(out / "timelines.json")

        stage = "resurgence"
        links = tracking.find_resurgences(
            tracked,
            effective_partitions(partitions, config),
            config.grid,
            theta=config.theta,
            mode=config.jaccard,
            kappa=config.kappa,
            k_max=config.k_max,
        )
        artifacts.links = links
        _json_dump(resurgence_payload(links, tracked, config), out / "resurgences.json")
        artifacts.paths["resurgences"] = str(out / "resurgences.json")

        stage = "report"
        write_reports(artifacts)
    except Exception as exc:
        _json_dump({"stage": stage, "error": str(exc)}, out / "failure_marker.json")
        raise
    return artifacts
