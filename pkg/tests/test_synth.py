import io
import json

import pytest

from chrontrack.chronnet import assign_window
from chrontrack.errors import InputError
from chrontrack.events import write_events_csv
from chrontrack.grid import GridSpec
from chrontrack.synth import (
    DEFAULT_T0,
    PatternSpec,
    WEEK_SECONDS,
    generate_events,
    load_patterns,
    write_truth_json,
)

from datetime import timedelta

GRID = GridSpec()


def block(r0, c0, h, w):
    return frozenset((r0 + i) * GRID.cols + (c0 + j) for i in range(h) for j in range(w))


SEASONAL = PatternSpec("season", block(5, 5, 2, 3), frozenset(range(26, 40)), 10)
ALWAYS = PatternSpec("always", block(20, 20, 2, 2), frozenset(), 5)


def test_events_appear_only_in_active_weeks():
    result = generate_events([SEASONAL], years=2, grid=GRID, seed=0)
    weeks = {assign_window(e.timestamp, DEFAULT_T0) for e in result.events}
    assert weeks == {w for w in range(104) if 26 <= w % 52 <= 39}


def test_all_noise_free_event_cells_belong_to_the_region():
    result = generate_events([SEASONAL], years=1, grid=GRID, seed=1)
    for e in result.events:
        cell = GRID.cell_id(GRID.locate(e.lat, e.lon))
        assert cell in SEASONAL.region


def test_truth_covers_emitted_cells():
    result = generate_events([SEASONAL, ALWAYS], years=1, grid=GRID, seed=2)
    for week, by_label in result.truth.items():
        for label, cells in by_label.items():
            region = SEASONAL.region if label == "season" else ALWAYS.region
            assert cells <= region
    # every truth week lists the always-on pattern
    assert all("always" in result.truth[w] for w in range(52))


def test_same_seed_gives_byte_identical_output():
    outputs = []
    for _ in range(2):
        result = generate_events([SEASONAL, ALWAYS], years=1, grid=GRID, noise_rate=3.0, seed=11)
        buf = io.StringIO()
        write_events_csv(result.events, buf)
        outputs.append(buf.getvalue())
    assert outputs[0] == outputs[1]


def test_different_seeds_differ():
    a = generate_events([SEASONAL], years=1, grid=GRID, seed=0)
    b = generate_events([SEASONAL], years=1, grid=GRID, seed=1)
    assert a.events != b.events


def test_timestamps_strictly_increase():
    result = generate_events([SEASONAL, ALWAYS], years=2, grid=GRID, noise_rate=5.0, seed=3)
    stamps = [e.timestamp for e in result.events]
    assert all(a < b for a, b in zip(stamps, stamps[1:]))


def test_overlapping_patterns_in_the_same_week_rejected():
    clashing = PatternSpec("clash", block(5, 5, 1, 2), frozenset({30}), 5)
    with pytest.raises(InputError, match="overlap"):
        generate_events([SEASONAL, clashing], years=1, grid=GRID)


def test_same_region_on_disjoint_weeks_is_allowed():
    winter = PatternSpec("winter", block(5, 5, 2, 3), frozenset(range(0, 10)), 5)
    result = generate_events([SEASONAL, winter], years=1, grid=GRID, seed=0)
    assert result.events


def test_pattern_validation():
    with pytest.raises(InputError):
        PatternSpec("p", frozenset(), frozenset(), 5)
    with pytest.raises(InputError):
        PatternSpec("p", frozenset({1}), frozenset(), 1)
    with pytest.raises(InputError):
        PatternSpec("p", frozenset({1}), frozenset({60}), 5)
    with pytest.raises(InputError):
        generate_events([SEASONAL], years=0, grid=GRID)
    with pytest.raises(InputError):
        generate_events([SEASONAL, SEASONAL], years=1, grid=GRID)
    outside = PatternSpec("out", frozenset({GRID.n_cells + 3}), frozenset(), 5)
    with pytest.raises(InputError, match="outside the grid"):
        generate_events([outside], years=1, grid=GRID)


def test_noise_events_interleave_at_roughly_the_requested_rate():
    result = generate_events([ALWAYS], years=2, grid=GRID, noise_rate=4.0, seed=5)
    n_pattern = 5 * 104
    n_noise = len(result.events) - n_pattern
    assert 0.5 * 4 * 104 < n_noise < 1.5 * 4 * 104


def test_pattern_file_round_trip(tmp_path):
    path = tmp_path / "patterns.json"
    path.write_text(
        json.dumps(
            [
                {"label": "a", "region": [1, 2, 3], "active_weeks": [0, 1], "events_per_week": 4},
                {"label": "b", "region": [40], "events_per_week": 2},
            ]
        )
    )
    patterns = load_patterns(path)
    assert patterns[0].label == "a" and patterns[0].active_weeks == {0, 1}
    assert patterns[1].active_weeks == frozenset()


def test_pattern_file_errors(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(InputError):
        load_patterns(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(InputError):
        load_patterns(bad)
    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text('[{"label": "x"}]')
    with pytest.raises(InputError):
        load_patterns(incomplete)


def test_truth_json_export(tmp_path):
    result = generate_events([ALWAYS], years=1, grid=GRID, seed=0)
    out = tmp_path / "truth.json"
    write_truth_json(result, out)
    data = json.loads(out.read_text())
    assert set(data["0"]) == {"always"}
    assert set(data["0"]["always"]) <= set(ALWAYS.region)


def test_events_fit_inside_their_week():
    result = generate_events([ALWAYS], years=1, grid=GRID, seed=9)
    for e in result.events:
        w = assign_window(e.timestamp, DEFAULT_T0)
        start = DEFAULT_T0 + timedelta(seconds=w * WEEK_SECONDS)
        assert start <= e.timestamp < start + timedelta(seconds=WEEK_SECONDS)
