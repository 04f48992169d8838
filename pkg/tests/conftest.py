import json

import pytest

from chrontrack.events import write_events_csv
from chrontrack.grid import GridSpec
from chrontrack.synth import PatternSpec, generate_events


def region_block(r0, c0, h, w, cols=30):
    return frozenset((r0 + i) * cols + (c0 + j) for i in range(h) for j in range(w))


@pytest.fixture(scope="session")
def benchmark_patterns():
    return [
        PatternSpec("north", region_block(5, 5, 2, 3), frozenset(range(26, 40)), 40),
        PatternSpec("south", region_block(20, 20, 2, 3), frozenset(range(26, 40)), 40),
    ]


@pytest.fixture(scope="session")
def benchmark_synth(benchmark_patterns):
    """Three simulated years, two seasonal regions, ~8.5% noise, seed 0."""
    return generate_events(
        benchmark_patterns, years=3, grid=GridSpec(), noise_rate=2.0, seed=0
    )


@pytest.fixture()
def benchmark_events_csv(tmp_path, benchmark_synth):
    path = tmp_path / "events.csv"
    with open(path, "w", newline="") as fh:
        write_events_csv(benchmark_synth.events, fh)
    return path


@pytest.fixture()
def small_events_csv(tmp_path):
    """One always-on region over one year; quick to push through every stage."""
    patterns = [
        PatternSpec("core", region_block(10, 10, 2, 2), frozenset(), 12),
        PatternSpec("fringe", region_block(22, 4, 2, 2), frozenset(range(0, 26)), 8),
    ]
    result = generate_events(patterns, years=1, grid=GridSpec(), noise_rate=1.0, seed=4)
    path = tmp_path / "small_events.csv"
    with open(path, "w", newline="") as fh:
        write_events_csv(result.events, fh)
    return path


@pytest.fixture()
def pattern_file(tmp_path):
    path = tmp_path / "patterns.json"
    path.write_text(
        json.dumps(
            [
                {
                    "label": "north",
                    "region": sorted(region_block(5, 5, 2, 3)),
                    "active_weeks": list(range(26, 40)),
                    "events_per_week": 40,
                },
                {
                    "label": "south",
                    "region": sorted(region_block(20, 20, 2, 3)),
                    "active_weeks": list(range(26, 40)),
                    "events_per_week": 40,
                },
            ]
        )
    )
    return path
