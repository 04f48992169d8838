"""Chronological-network snapshots.

Ordered events are sliced into fixed, non-overlapping windows; within each
window every pair of consecutive events adds weight 1 to the undirected edge
between their grid cells (self-loops when both fall in the same cell).
Consecutive pairs spanning a window boundary are not linked.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Sequence
from xml.etree import ElementTree as ET

from .errors import InputError
from .events import FireEvent, format_utc, parse_utc
from .grid import GridSpec, StudyBox, manhattan_distance

WEEK = timedelta(days=7)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Snapshot:
    """One window's weighted undirected graph over grid cells.

    ``edges`` maps canonical (min_cell, max_cell) pairs to positive integer
    weights. ``radius`` records an applied Manhattan-distance filter; for
    filtered snapshots the weight-sum bookkeeping below no longer holds.
    """

    index: int
    start: datetime
    end: datetime
    n_cells: int
    edges: dict[Edge, int] = field(default_factory=dict)
    event_count: int = 0
    radius: int | None = None

    def total_weight(self) -> int:
        return sum(self.edges.values())

    def active_cells(self) -> set[int]:
        cells: set[int] = set()
        for u, v in self.edges:
            cells.add(u)
            cells.add(v)
        return cells


def assign_window(t: datetime, t0: datetime, dt: timedelta = WEEK) -> int:
    """Index of the window [t0 + i*dt, t0 + (i+1)*dt) containing t."""
    if t < t0:
        raise InputError(f"event at {format_utc(t)} precedes window origin {format_utc(t0)}")
    return (t - t0) // dt


def build_snapshots(
    events: Sequence[FireEvent],
    grid: GridSpec,
    t0: datetime,
    dt: timedelta = WEEK,
    drop_self_loops: bool = False,
) -> list[Snapshot]:
    """One snapshot per window, from window 0 through the last event's window.

    Events must already be chronologically ordered. Empty windows yield
    explicit empty snapshots so calendar alignment never shifts.
    """
    if not events:
        return []
    last = assign_window(events[-1].timestamp, t0, dt)
    edges: list[dict[Edge, int]] = [dict() for _ in range(last + 1)]
    counts = [0] * (last + 1)

    prev_ts: datetime | None = None
    prev_window = -1
    prev_cell = -1
    for ev in events:
        if prev_ts is not None and ev.timestamp < prev_ts:
            raise ValueError("events are not chronologically ordered")
        prev_ts = ev.timestamp
        window = assign_window(ev.timestamp, t0, dt)
        cell = grid.cell_id(grid.locate(ev.lat, ev.lon))
        counts[window] += 1
        if window == prev_window and not (drop_self_loops and cell == prev_cell):
            key = (prev_cell, cell) if prev_cell <= cell else (cell, prev_cell)
            edges[window][key] = edges[window].get(key, 0) + 1
        prev_window, prev_cell = window, cell

    return [
        Snapshot(
            index=i,
            start=t0 + i * dt,
            end=t0 + (i + 1) * dt,
            n_cells=grid.n_cells,
            edges=edges[i],
            event_count=counts[i],
        )
        for i in range(last + 1)
    ]


def radius_filter(snapshot: Snapshot, grid: GridSpec, r: int) -> Snapshot:
    """Keep only edges whose endpoints are within Manhattan distance r."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    kept = {
        (u, v): w
        for (u, v), w in snapshot.edges.items()
        if manhattan_distance(grid.coord(u), grid.coord(v)) <= r
    }
    return replace(snapshot, edges=kept, radius=r)


# ---------------------------------------------------------------------------
# Disk format: one edge-list CSV per snapshot plus a manifest JSON.
# ---------------------------------------------------------------------------


def _grid_meta(grid: GridSpec) -> dict:
    return {
        "rows": grid.rows,
        "cols": grid.cols,
        "bbox": [grid.box.lon_min, grid.box.lat_min, grid.box.lon_max, grid.box.lat_max],
    }


def grid_from_meta(meta: dict) -> GridSpec:
    lon_min, lat_min, lon_max, lat_max = meta["bbox"]
    return GridSpec(StudyBox(lon_min, lon_max, lat_min, lat_max), meta["rows"], meta["cols"])


def write_snapshots(
    snapshots: Sequence[Snapshot],
    grid: GridSpec,
    t0: datetime,
    dt: timedelta,
    outdir: str | Path,
    graphml: bool = False,
) -> Path:
    """Write edge lists and the manifest into ``outdir``; returns the manifest path."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for snap in snapshots:
        name = f"snapshot_{snap.index:05d}.csv"
        with open(out / name, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["src", "dst", "weight"])
            for (u, v), w in sorted(snap.edges.items()):
                writer.writerow([u, v, w])
        entries.append(
            {
                "index": snap.index,
                "start": format_utc(snap.start),
                "end": format_utc(snap.end),
                "event_count": snap.event_count,
                "path": name,
            }
        )
        if graphml:
            _write_graphml(snap, out / f"snapshot_{snap.index:05d}.graphml")
    manifest = {
        "grid": _grid_meta(grid),
        "t0": format_utc(t0),
        "dt_days": dt / timedelta(days=1),
        "radius": snapshots[0].radius if snapshots else None,
        "snapshots": entries,
    }
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_snapshots(indir: str | Path) -> tuple[list[Snapshot], GridSpec, datetime, timedelta]:
    """Load a snapshot directory written by :func:`write_snapshots`."""
    root = Path(indir)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise InputError(f"no snapshot manifest at {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    grid = grid_from_meta(manifest["grid"])
    t0 = parse_utc(manifest["t0"])
    dt = timedelta(days=manifest["dt_days"])
    radius = manifest.get("radius")

    snapshots = []
    for entry in manifest["snapshots"]:
        edges: dict[Edge, int] = {}
        with open(root / entry["path"], newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for src, dst, weight in reader:
                edges[(int(src), int(dst))] = int(weight)
        snapshots.append(
            Snapshot(
                index=entry["index"],
                start=parse_utc(entry["start"]),
                end=parse_utc(entry["end"]),
                n_cells=grid.n_cells,
                edges=edges,
                event_count=entry["event_count"],
                radius=radius,
            )
        )
    snapshots.sort(key=lambda s: s.index)
    return snapshots, grid, t0, dt


def _write_graphml(snapshot: Snapshot, path: Path) -> None:
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    ET.SubElement(
        root, "key", {"id": "w", "for": "edge", "attr.name": "weight", "attr.type": "int"}
    )
    graph = ET.SubElement(root, "graph", {"id": f"snapshot_{snapshot.index}", "edgedefault": "undirected"})
    for cell in sorted(snapshot.active_cells()):
        ET.SubElement(graph, "node", {"id": str(cell)})
    for (u, v), w in sorted(snapshot.edges.items()):
        edge = ET.SubElement(graph, "edge", {"source": str(u), "target": str(v)})
        data = ET.SubElement(edge, "data", {"key": "w"})
        data.text = str(w)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, xml_declaration=True, encoding="unicode")
