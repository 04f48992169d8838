"""Synthetic event streams with planted spatial communities and ground truth.

Patterns are regions of cells active on chosen weeks of a 52-week year; each
active week emits a contiguous run of events from the region so that
consecutive-event linking concentrates edges inside it. Uniform noise events
interleave at a configurable weekly rate. Everything is deterministic in the
seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError
from .events import FireEvent
from .grid import GridSpec

WEEKS_PER_YEAR = 52
WEEK_SECONDS = 7 * 24 * 3600

DEFAULT_T0 = datetime(2003, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class PatternSpec:
    """A planted community: where it lives, when it burns, how hard."""

    label: str
    region: frozenset[int]
    active_weeks: frozenset[int]  # week-of-year indices; empty = always active
    events_per_week: int

    def __post_init__(self) -> None:
        if not self.region:
            raise InputError(f"pattern {self.label!r} has an empty region")
        if self.events_per_week < 2:
            raise InputError(
                f"pattern {self.label!r} needs at least 2 events per week to create edges"
            )
        bad = [w for w in self.active_weeks if not 0 <= w < WEEKS_PER_YEAR]
        if bad:
            raise InputError(f"pattern {self.label!r} has week indices outside 0..51: {bad}")

    def active_on(self, week_of_year: int) -> bool:
        return not self.active_weeks or week_of_year in self.active_weeks


@dataclass
class SynthResult:
    events: list[FireEvent]
    truth: dict[int, dict[str, frozenset[int]]]  # week index -> label -> emitted cells


def load_patterns(path: str | Path) -> list[PatternSpec]:
    """Pattern file: [{label, region:[cells], active_weeks:[...], events_per_week}]."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read pattern file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"pattern file is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise InputError("pattern file must hold a JSON list")
    patterns = []
    for i, entry in enumerate(raw):
        try:
            patterns.append(
                PatternSpec(
                    label=str(entry["label"]),
                    region=frozenset(int(c) for c in entry["region"]),
                    active_weeks=frozenset(int(w) for w in entry.get("active_weeks", [])),
                    events_per_week=int(entry["events_per_week"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"pattern entry {i}: {exc}") from exc
    return patterns


def _check_overlaps(patterns: Sequence[PatternSpec]) -> None:
    for i, a in enumerate(patterns):
        for b in patterns[i + 1 :]:
            weeks_clash = (
                not a.active_weeks or not b.active_weeks or a.active_weeks & b.active_weeks
            )
            if weeks_clash and a.region & b.region:
                raise InputError(
                    f"patterns {a.label!r} and {b.label!r} overlap in the same week; "
                    "ground truth would be ambiguous"
                )


def generate_events(
    patterns: Sequence[PatternSpec],
    years: int,
    grid: GridSpec,
    noise_rate: float = 0.0,
    seed: int = 0,
    t0: datetime = DEFAULT_T0,
) -> SynthResult:
    """Emit ``years`` * 52 weeks of events plus per-week ground truth.

    Week w runs [t0 + w*7d, t0 + (w+1)*7d); a pattern is active on week w
    when w mod 52 is in its active_weeks. Pattern events are contiguous runs
    of cells drawn uniformly from the region; noise cells are uniform over
    the grid and interleave at ``noise_rate`` expected events per week.
    Timestamps are strictly increasing integer seconds.
    """
    if years < 1:
        raise InputError("years must be at least 1")
    if noise_rate < 0:
        raise InputError("noise rate must be non-negative")
    labels = [p.label for p in patterns]
    if len(set(labels)) != len(labels):
        raise InputError("pattern labels must be unique")
    for p in patterns:
        outside = [c for c in p.region if not 0 <= c < grid.n_cells]
        if outside:
            raise InputError(f"pattern {p.label!r} has cells outside the grid: {sorted(outside)}")
    _check_overlaps(patterns)

    rng = np.random.default_rng(seed)
    events: list[FireEvent] = []
    truth: dict[int, dict[str, frozenset[int]]] = {}

    for week in range(years * WEEKS_PER_YEAR):
        week_of_year = week % WEEKS_PER_YEAR
        week_start = t0 + week * timedelta(seconds=WEEK_SECONDS)

        tagged: list[tuple[float, int, str | None]] = []  # (sort key, cell, label)
        slot = 0
        week_truth: dict[str, frozenset[int]] = {}
        for pattern in patterns:
            if not pattern.active_on(week_of_year):
                continue
            region = sorted(pattern.region)
            cells = rng.choice(region, size=pattern.events_per_week)
            for cell in cells:
                tagged.append((float(slot), int(cell), pattern.label))
                slot += 1
            week_truth[pattern.label] = frozenset(int(c) for c in cells)
        n_noise = int(rng.poisson(noise_rate)) if noise_rate > 0 else 0
        if n_noise:
            keys = rng.uniform(0.0, max(slot, 1), size=n_noise)
            cells = rng.integers(0, grid.n_cells, size=n_noise)
            for key, cell in zip(keys, cells):
                tagged.append((float(key), int(cell), None))
        if week_truth:
            truth[week] = week_truth
        if not tagged:
            continue

        tagged.sort(key=lambda t: (t[0], t[1]))
        spacing = WEEK_SECONDS // (len(tagged) + 1)
        if spacing == 0:
            raise InputError(
                f"week {week} holds {len(tagged)} events; second-resolution "
                "timestamps cannot stay strictly increasing"
            )
        confidences = rng.integers(70, 101, size=len(tagged))
        for pos, (_, cell, _) in enumerate(tagged):
            lat, lon = grid.center(grid.coord(cell))
            ts = week_start + timedelta(seconds=(pos + 1) * spacing)
            events.append(FireEvent(ts, lat, lon, float(confidences[pos])))

    return SynthResult(events=events, truth=truth)


def write_truth_json(result: SynthResult, path: str | Path) -> None:
    payload = {
        str(week): {label: sorted(cells) for label, cells in sorted(by_label.items())}
        for week, by_label in sorted(result.truth.items())
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
