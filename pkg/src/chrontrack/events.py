"""Event ingest: parse, validate, filter, and chronologically order detections."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Sequence

from .errors import InputError, ParseError
from .grid import DEFAULT_BOX, StudyBox

CANONICAL_COLUMNS = ("timestamp", "lat", "lon", "confidence")
MODIS_COLUMNS = ("acq_date", "acq_time", "latitude", "longitude", "confidence")

DEFAULT_MIN_CONFIDENCE = 70.0


@dataclass(frozen=True)
class FireEvent:
    """A single timestamped, geolocated detection with percent confidence."""

    timestamp: datetime
    lat: float
    lon: float
    confidence: float

    def __post_init__(self) -> None:
        ts = self.timestamp
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        else:
            ts = ts.astimezone(timezone.utc)
        object.__setattr__(self, "timestamp", ts)
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")
        if not 0.0 <= self.confidence <= 100.0:
            raise ValueError(f"confidence out of range: {self.confidence}")


@dataclass
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    events: list[FireEvent]
    errors: list[RowError] = field(default_factory=list)


@dataclass
class FilterResult:
    events: list[FireEvent]
    dropped_confidence: int = 0
    dropped_outside_box: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_confidence + self.dropped_outside_box


def parse_utc(text: str) -> datetime:
    """ISO 8601 instant; a trailing Z or a naive value is read as UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_utc(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_modis_time(date_text: str, time_text: str) -> datetime:
    # MODIS acq_time is an HHMM integer; "12" means 00:12.
    t = time_text.strip().replace(":", "")
    if not t.isdigit() or len(t) > 4:
        raise ValueError(f"bad acquisition time {time_text!r}")
    t = t.zfill(4)
    hour, minute = int(t[:2]), int(t[2:])
    day = datetime.fromisoformat(date_text.strip())
    return day.replace(hour=hour, minute=minute, tzinfo=timezone.utc)


def _row_to_event(row: dict[str, str], fmt: str) -> FireEvent:
    if fmt == "modis":
        ts = _parse_modis_time(row["acq_date"], row["acq_time"])
        lat, lon = float(row["latitude"]), float(row["longitude"])
    else:
        ts = parse_utc(row["timestamp"])
        lat, lon = float(row["lat"]), float(row["lon"])
    return FireEvent(ts, lat, lon, float(row["confidence"]))


def parse_events(source: IO[str] | Iterable[str], fmt: str = "plain", strict: bool = True) -> ParseResult:
    """Parse a CSV event stream.

    ``fmt`` selects the header mapping: "plain" expects
    timestamp,lat,lon,confidence with ISO 8601 UTC timestamps; "modis"
    expects the raw acq_date/acq_time/latitude/longitude/confidence columns.
    Strict mode aborts on the first malformed row; lenient mode skips the
    row and records it in the result.
    """
    if fmt not in ("plain", "modis"):
        raise InputError(f"unknown event format {fmt!r}")
    columns = MODIS_COLUMNS if fmt == "modis" else CANONICAL_COLUMNS

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "empty stream, expected a header line") from None
    names = [h.strip().lower() for h in header]
    missing = [c for c in columns if c not in names]
    if missing:
        raise ParseError(1, f"header is missing column(s): {', '.join(missing)}")
    index = {c: names.index(c) for c in columns}

    result = ParseResult(events=[])
    for line_no, raw in enumerate(reader, start=2):
        if not raw or all(not f.strip() for f in raw):
            continue
        try:
            if len(raw) < len(names):
                raise ValueError(f"expected {len(names)} fields, got {len(raw)}")
            row = {c: raw[i] for c, i in index.items()}
            result.events.append(_row_to_event(row, fmt))
        except (ValueError, KeyError) as exc:
            if strict:
                raise ParseError(line_no, str(exc)) from None
            result.errors.append(RowError(line_no, str(exc)))
    return result


def filter_events(
    events: Sequence[FireEvent],
    box: StudyBox = DEFAULT_BOX,
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
    inclusive: bool = True,
) -> FilterResult:
    """Keep events inside the study box with sufficient confidence.

    ``inclusive`` keeps confidence == min_confidence (the default reading of
    an "above X%" threshold); pass False for a strict > comparison.
    Dropped events are counted per reason; confidence is checked first.
    """
    result = FilterResult(events=[])
    for ev in events:
        ok_conf = ev.confidence >= min_confidence if inclusive else ev.confidence > min_confidence
        if not ok_conf:
            result.dropped_confidence += 1
        elif not box.contains(ev.lat, ev.lon):
            result.dropped_outside_box += 1
        else:
            result.events.append(ev)
    return result


def order_events(events: Sequence[FireEvent]) -> list[FireEvent]:
    """Ascending by timestamp; ties break by (lat, lon, input order)."""
    return sorted(events, key=lambda e: (e.timestamp, e.lat, e.lon))


def write_events_csv(events: Iterable[FireEvent], dest: IO[str]) -> int:
    """Write the canonical CSV format; returns the number of rows written."""
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CANONICAL_COLUMNS)
    n = 0
    for ev in events:
        writer.writerow([format_utc(ev.timestamp), repr(ev.lat), repr(ev.lon), repr(ev.confidence)])
        n += 1
    return n
