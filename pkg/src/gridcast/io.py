"""CSV ingestion and writing for load data and hierarchy files.

Load CSV format: header ``timestamp,series_id,level,load_mw,temp_f`` with
``YYYY-MM-DDTHH:00:00`` timestamps; an empty load field marks a missing
observation. Hierarchy CSV: header ``utility_id,bus_id`` (extra trailing
columns are reserved and ignored).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError, IngestError
from .series import Level, LoadSeries, SeriesId, format_hour, parse_hour

LOAD_HEADER = ["timestamp", "series_id", "level", "load_mw", "temp_f"]
HIERARCHY_HEADER = ["utility_id", "bus_id"]


def _parse_level(token: str, line_no: int) -> Level:
    try:
        return Level(token.strip().lower())
    except ValueError:
        raise IngestError(f"line {line_no}: unknown level tag {token!r}") from None


def _parse_float(token: str, what: str, line_no: int) -> float:
    token = token.strip()
    if token == "":
        return np.nan
    try:
        return float(token)
    except ValueError:
        raise IngestError(f"line {line_no}: non-numeric {what} {token!r}") from None


def ingest_csv(path: str | Path, level: Level) -> list[LoadSeries]:
    """Read all series of ``level`` from a load CSV.

    Rows with a duplicate (series, timestamp) keep the first value seen;
    hours absent between a series' first and last timestamp become NaN
    markers. Rows of the other (valid) level are skipped.
    """
    path = Path(path)
    rows: dict[str, dict[int, tuple[float, float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != LOAD_HEADER:
            raise IngestError(f"{path}: expected header {','.join(LOAD_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise IngestError(f"line {line_no}: expected 5 fields, got {len(row)}")
            ts_text, sid, level_text, load_text, temp_text = row
            row_level = _parse_level(level_text, line_no)
            if row_level is not level:
                continue
            try:
                hour = parse_hour(ts_text)
            except DataError as exc:
                raise IngestError(f"line {line_no}: {exc}") from None
            load = _parse_float(load_text, "load", line_no)
            temp = _parse_float(temp_text, "temperature", line_no)
            series_rows = rows.setdefault(sid.strip(), {})
            series_rows.setdefault(hour, (load, temp))  # first wins on duplicates

    out = []
    for sid in sorted(rows):
        by_hour = rows[sid]
        start, last = min(by_hour), max(by_hour)
        n = last - start + 1
        load = np.full(n, np.nan)
        temp = np.full(n, np.nan)
        for hour, (lv, tv) in by_hour.items():
            load[hour - start] = lv
            temp[hour - start] = tv
        out.append(LoadSeries(SeriesId(sid, level), start, load, temp))
    return out


def write_csv(path: str | Path, series: list[LoadSeries]) -> None:
    """Write series in the load CSV format (NaN load/temp as empty fields)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOAD_HEADER)
        for s in series:
            for i, hour in enumerate(s.hours()):
                load = "" if np.isnan(s.load[i]) else repr(float(s.load[i]))
                temp = "" if np.isnan(s.temperature[i]) else repr(float(s.temperature[i]))
                writer.writerow([format_hour(int(hour)), s.series.id, s.series.level.value, load, temp])


def read_hierarchy_csv(path: str | Path) -> dict[str, list[str]]:
    """Map each utility id to its member bus ids."""
    path = Path(path)
    mapping: dict[str, list[str]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != HIERARCHY_HEADER:
            raise IngestError(f"{path}: expected header {','.join(HIERARCHY_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise IngestError(f"line {line_no}: expected utility_id,bus_id")
            utility, bus = row[0].strip(), row[1].strip()
            if not utility or not bus:
                raise IngestError(f"line {line_no}: empty id")
            buses = mapping.setdefault(utility, [])
            if bus not in buses:
                buses.append(bus)
    return mapping


def write_hierarchy_csv(path: str | Path, mapping: dict[str, list[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HIERARCHY_HEADER)
        for utility in sorted(mapping):
            for bus in mapping[utility]:
                writer.writerow([utility, bus])
