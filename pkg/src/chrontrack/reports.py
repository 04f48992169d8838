"""Calendar-aligned report tables (year rows, 7-day-slot columns).

Each snapshot lands in the row of its window-start year and the column
(day_of_year - 1) // 7. With the default weekly cadence from a Jan 1 origin
this gives 52-53 collision-free columns per year.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import IO, Sequence

from .community import Partition
from .errors import InputError
from .tracking import CommunityRef

N_WEEK_COLUMNS = 53


@dataclass
class CalendarTable:
    """Sparse year-by-week table; cells hold floats (or None for absent)."""

    years: list[int]
    cells: dict[tuple[int, int], float | None]

    def value(self, year: int, week: int) -> float | None:
        return self.cells.get((year, week))

    @property
    def n_cells(self) -> int:
        return len(self.cells)


def snapshot_calendar_slot(index: int, t0: datetime, dt: timedelta) -> tuple[int, int]:
    """(year, week column) of a snapshot's window start."""
    start = t0 + index * dt
    return start.year, (start.timetuple().tm_yday - 1) // 7


def _build_table(slots: dict[int, float | None], t0: datetime, dt: timedelta) -> CalendarTable:
    cells: dict[tuple[int, int], float | None] = {}
    for index, value in slots.items():
        slot = snapshot_calendar_slot(index, t0, dt)
        if slot in cells:
            raise InputError(
                "calendar table requires non-colliding windows; "
                f"snapshot {index} collides at year {slot[0]} week {slot[1]}"
            )
        cells[slot] = value
    years = sorted({year for year, _ in cells})
    return CalendarTable(years=years, cells=cells)


def modularity_table(partitions: Sequence[Partition], t0: datetime, dt: timedelta) -> CalendarTable:
    """Per-snapshot modularity; edgeless snapshots appear as absent cells."""
    return _build_table({p.snapshot_index: p.q for p in partitions}, t0, dt)


def presence_table(
    entries: Sequence[CommunityRef],
    partitions: Sequence[Partition],
    t0: datetime,
    dt: timedelta,
) -> CalendarTable:
    """Community size per snapshot for one timeline (or merged thread).

    Covers every week of the years the timeline spans; snapshots where the
    community is absent show as absent cells. Two entries on the same
    snapshot (possible in a merged thread) sum their sizes.
    """
    if not entries:
        raise ValueError("presence table of an empty timeline")
    by_index = {p.snapshot_index: p for p in partitions}
    sizes: dict[int, float] = {}
    for ref in entries:
        size = len(by_index[ref.snapshot].communities[ref.community])
        sizes[ref.snapshot] = sizes.get(ref.snapshot, 0) + size

    table = _build_table(dict(sizes.items()), t0, dt)
    first_year = (t0 + min(e.snapshot for e in entries) * dt).year
    last_year = (t0 + max(e.snapshot for e in entries) * dt).year
    table.years = list(range(first_year, last_year + 1))
    return table


def write_calendar_csv(table: CalendarTable, dest: IO[str] | str | Path, fmt: str = "repr") -> None:
    """CSV with a year column and w00..w52 columns; absent cells are empty.

    fmt "repr" keeps full float precision; "int" renders whole numbers.
    """
    close = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", newline="")
        close = True
    try:
        writer = csv.writer(dest, lineterminator="\n")
        writer.writerow(["year"] + [f"w{w:02d}" for w in range(N_WEEK_COLUMNS)])
        for year in table.years:
            row: list[str] = [str(year)]
            for week in range(N_WEEK_COLUMNS):
                value = table.value(year, week)
                if value is None:
                    row.append("")
                elif fmt == "int":
                    row.append(str(int(value)))
                else:
                    row.append(repr(value))
            writer.writerow(row)
    finally:
        if close:
            dest.close()
