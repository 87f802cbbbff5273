"""Per-minute world snapshots and the persisted event pool.

Both archives are newline-delimited JSON: a header record carrying the
schema version, config hash and run parameters, then one record per tick
(or per event).  The format is line-oriented so replay can stream and
fail at the exact offending record.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

TICK_SCHEMA = "haulsim-ticks-v1"
EVENT_SCHEMA = "haulsim-events-v1"


class ReplayError(Exception):
    """A tick or event archive is corrupt, truncated or out of order."""


def _dumps(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def make_header(schema: str, *, config_hash: str, policy: str, seed: int,
                duration: float, tick_interval: float) -> dict:
    return {
        "schema": schema,
        "config_hash": config_hash,
        "policy": policy,
        "seed": seed,
        "duration": duration,
        "tick_interval": tick_interval,
    }


def write_ndjson(path: str | Path, header: dict, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for r in records:
            fh.write(_dumps(r) + "\n")


def _read_lines(path: str | Path, schema: str) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                raise ReplayError(f"{path}: blank record at line {lineno + 1}")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ReplayError(f"{path}: corrupt record at line {lineno + 1}: {e}") from e
            if lineno == 0:
                if record.get("schema") != schema:
                    raise ReplayError(
                        f"{path}: expected schema {schema!r}, found {record.get('schema')!r}")
            yield lineno, record


def replay_ticks(path: str | Path) -> tuple[dict, list[dict]]:
    """Stream a tick archive back, validating order and shape.

    Returns (header, records).  Raises ReplayError naming the offending
    tick on any gap, disorder or corruption.
    """
    header: dict | None = None
    records: list[dict] = []
    expected = 0
    prev_t = -1.0
    for lineno, record in _read_lines(path, TICK_SCHEMA):
        if lineno == 0:
            header = record
            continue
        for key in ("t", "i", "trucks", "load_sites", "dump_sites", "roads"):
            if key not in record:
                raise ReplayError(f"{path}: tick at line {lineno + 1} missing field {key!r}")
        if record["i"] != expected:
            raise ReplayError(
                f"{path}: gap in tick archive: expected tick {expected}, "
                f"found tick {record['i']} (t={record['t']})")
        if record["t"] <= prev_t:
            raise ReplayError(
                f"{path}: tick {record['i']} time {record['t']} not increasing")
        prev_t = record["t"]
        expected += 1
        records.append(record)
    if header is None:
        raise ReplayError(f"{path}: empty archive (no header)")
    interval = header.get("tick_interval", 1.0)
    want = int(header.get("duration", 0) // interval) + 1
    if len(records) != want:
        raise ReplayError(
            f"{path}: truncated archive: {len(records)} ticks, expected {want} "
            f"(first missing tick {len(records)})")
    return header, records


def replay_events(path: str | Path) -> tuple[dict, list[dict]]:
    """Stream an event archive back, validating the (t, seq) order key."""
    header: dict | None = None
    records: list[dict] = []
    prev = (-1.0, -1)
    for lineno, record in _read_lines(path, EVENT_SCHEMA):
        if lineno == 0:
            header = record
            continue
        for key in ("t", "seq", "kind"):
            if key not in record:
                raise ReplayError(f"{path}: event at line {lineno + 1} missing field {key!r}")
        key = (record["t"], record["seq"])
        if key <= prev:
            raise ReplayError(
                f"{path}: event seq {record['seq']} at t={record['t']} out of order")
        prev = key
        records.append(record)
    if header is None:
        raise ReplayError(f"{path}: empty archive (no header)")
    return header, records
