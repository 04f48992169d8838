import io
from datetime import datetime, timezone

import pytest

from chrontrack.errors import ParseError
from chrontrack.events import (
    FireEvent,
    filter_events,
    order_events,
    parse_events,
    write_events_csv,
)
from chrontrack.grid import DEFAULT_BOX

HEADER = "timestamp,lat,lon,confidence\n"


def parse(text, **kwargs):
    return parse_events(io.StringIO(text), **kwargs)


def ev(ts="2003-01-01T00:00:00Z", lat=-3.0, lon=-60.0, conf=90.0):
    return FireEvent(
        datetime.fromisoformat(ts.replace("Z", "+00:00")), lat, lon, conf
    )


def test_parse_single_row():
    result = parse(HEADER + "2003-01-01T00:12:00Z,-3.5,-60.2,85\n")
    assert len(result.events) == 1
    e = result.events[0]
    assert e.timestamp == datetime(2003, 1, 1, 0, 12, tzinfo=timezone.utc)
    assert (e.lat, e.lon, e.confidence) == (-3.5, -60.2, 85.0)


def test_parse_header_only_is_empty():
    assert parse(HEADER).events == []


def test_parse_preserves_row_order():
    result = parse(
        HEADER
        + "2003-01-02T00:00:00Z,-3.0,-60.0,80\n"
        + "2003-01-01T00:00:00Z,-4.0,-61.0,90\n"
    )
    assert [e.lat for e in result.events] == [-3.0, -4.0]


def test_parse_latitude_out_of_range_reports_line():
    with pytest.raises(ParseError) as err:
        parse(HEADER + "2003-01-01T00:00:00Z,95,-60.0,80\n")
    assert err.value.line == 2
    assert "latitude" in str(err.value)


def test_parse_strict_aborts_on_bad_timestamp():
    with pytest.raises(ParseError) as err:
        parse(HEADER + "not-a-time,-3.0,-60.0,80\n")
    assert err.value.line == 2


def test_parse_lenient_skips_and_counts():
    result = parse(
        HEADER
        + "2003-01-01T00:00:00Z,-3.0,-60.0,80\n"
        + "bad,-3.0,-60.0,80\n"
        + "2003-01-01T01:00:00Z,999,-60.0,80\n"
        + "2003-01-01T02:00:00Z,-4.0,-61.0,75\n",
        strict=False,
    )
    assert len(result.events) == 2
    assert [e.line for e in result.errors] == [3, 4]


def test_parse_missing_column_is_a_header_error():
    with pytest.raises(ParseError) as err:
        parse("timestamp,lat,lon\n2003-01-01T00:00:00Z,-3,-60\n")
    assert err.value.line == 1


def test_parse_empty_stream_is_an_error():
    with pytest.raises(ParseError):
        parse("")


def test_parse_modis_format():
    text = (
        "latitude,longitude,brightness,acq_date,acq_time,confidence\n"
        "-3.5,-60.2,330.1,2003-01-01,0012,85\n"
        "-4.0,-61.0,310.0,2003-01-02,12,70\n"
    )
    result = parse(text, fmt="modis")
    assert result.events[0].timestamp == datetime(2003, 1, 1, 0, 12, tzinfo=timezone.utc)
    assert result.events[1].timestamp == datetime(2003, 1, 2, 0, 12, tzinfo=timezone.utc)
    assert result.events[0].lat == -3.5


def test_filter_confidence_boundary_is_inclusive():
    kept = filter_events([ev(conf=70.0)], min_confidence=70.0)
    assert len(kept.events) == 1
    dropped = filter_events([ev(conf=69.9)], min_confidence=70.0)
    assert dropped.events == [] and dropped.dropped_confidence == 1


def test_filter_exclusive_flag_drops_the_boundary():
    result = filter_events([ev(conf=70.0)], min_confidence=70.0, inclusive=False)
    assert result.events == [] and result.dropped_confidence == 1


def test_filter_drops_events_outside_box():
    result = filter_events([ev(lon=-75.0)])
    assert result.events == [] and result.dropped_outside_box == 1


def test_filter_box_edges_are_closed():
    result = filter_events([ev(lat=5.0, lon=-50.0), ev(lat=-15.0, lon=-70.0)])
    assert len(result.events) == 2


def test_filter_counts_conserve_input_size():
    events = [ev(conf=50), ev(lon=-80), ev(), ev(conf=71), ev(lat=20)]
    result = filter_events(events)
    assert len(result.events) + result.dropped == len(events)
    assert DEFAULT_BOX.contains(result.events[0].lat, result.events[0].lon)


def test_order_events_sorts_by_timestamp():
    events = [ev("2003-01-01T00:00:05Z"), ev("2003-01-01T00:00:03Z"), ev("2003-01-01T00:00:04Z")]
    assert [e.timestamp.second for e in order_events(events)] == [3, 4, 5]


def test_order_events_breaks_timestamp_ties_by_position():
    a = ev(lat=-4.0, lon=-60.0)
    b = ev(lat=-5.0, lon=-60.0)
    assert order_events([a, b]) == [b, a]
    # identical keys keep input order (stable sort)
    c1, c2 = ev(lat=-4.0), ev(lat=-4.0)
    assert order_events([c1, c2]) == [c1, c2]


def test_order_events_is_idempotent():
    events = [ev("2003-01-01T00:00:05Z"), ev("2003-01-01T00:00:03Z", lat=-7.0)]
    once = order_events(events)
    assert order_events(once) == once


def test_parse_filter_order_is_deterministic():
    text = (
        HEADER
        + "2003-01-05T10:00:00Z,-3.0,-60.0,80\n"
        + "2003-01-01T00:00:00Z,-4.0,-61.0,90\n"
        + "2003-01-03T05:00:00Z,-5.0,-62.0,65\n"
    )
    runs = [order_events(filter_events(parse(text).events).events) for _ in range(2)]
    assert runs[0] == runs[1]


def test_write_events_round_trips():
    events = order_events([ev(), ev("2003-01-02T03:04:05Z", lat=-7.25, lon=-55.125, conf=72.5)])
    buf = io.StringIO()
    assert write_events_csv(events, buf) == 2
    back = parse(buf.getvalue())
    assert back.events == events


def test_event_rejects_bad_fields():
    with pytest.raises(ValueError):
        ev(lat=91.0)
    with pytest.raises(ValueError):
        ev(lon=181.0)
    with pytest.raises(ValueError):
        ev(conf=101.0)
