"""File-backed forecast store and the operator adjustment journal.

Forecast bundles are write-once per (series, origin, model-tag) key, one
JSON artifact each; adjustments live in an append-only JSONL journal.
Adjusted views are pure functions of (raw bundles, journal), so raw
bundles stay recoverable and replaying the journal is idempotent.
"""

from __future__ import annotations

import datetime as dt
import json
import urllib.parse
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConflictError, DuplicateKeyError, StoreError
from .hierarchy import Hierarchy
from .model.forecast import COMPONENT_NAMES, ForecastBundle
from .reconcile import bottom_up
from .series import Level, SeriesId, format_hour, parse_hour

JOURNAL_VERSION = 1


@dataclass(frozen=True)
class AdjustmentRecord:
    """Operator intervention: per-bus load factor or per-component offset.

    ``offsets`` (ComponentOffset only) align hour-by-hour with
    [valid_from, valid_to). Scope is a set of bus ids or a utility id;
    utility scope expands to the member buses when applied. A load factor
    scales all quantile rows alike, so the interval width shrinks
    proportionally (a documented approximation).
    """

    id: str
    scope_level: Level
    scope_ids: tuple[str, ...]
    kind: str  # "load_factor" | "component_offset"
    valid_from: int
    valid_to: int
    author: str
    created_at: str
    load_factor: float | None = None
    component: str | None = None
    offsets: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("load_factor", "component_offset"):
            raise StoreError(f"unknown adjustment kind {self.kind!r}")
        if not self.scope_ids:
            raise StoreError("adjustment scope must name at least one series")
        if self.valid_from >= self.valid_to:
            raise StoreError("valid_from must precede valid_to")
        if self.kind == "load_factor":
            if self.load_factor is None or not 0.0 <= self.load_factor <= 1.0:
                raise StoreError("load_factor must lie in [0, 1]")
        else:
            if self.component not in COMPONENT_NAMES:
                raise StoreError(f"component must be one of {COMPONENT_NAMES}")
            if self.offsets is None or len(self.offsets) != self.valid_to - self.valid_from:
                raise StoreError("offsets must cover every hour of the validity window")

    def active_hours(self) -> range:
        return range(self.valid_from, self.valid_to)

    def to_json_dict(self) -> dict:
        return {
            "version": JOURNAL_VERSION,
            "id": self.id,
            "scope_level": self.scope_level.value,
            "scope_ids": list(self.scope_ids),
            "kind": self.kind,
            "load_factor": self.load_factor,
            "component": self.component,
            "offsets": None if self.offsets is None else list(self.offsets),
            "valid_from": format_hour(self.valid_from),
            "valid_to": format_hour(self.valid_to),
            "author": self.author,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "AdjustmentRecord":
        if d.get("version") != JOURNAL_VERSION:
            raise StoreError("unknown journal record version")
        return cls(
            id=d["id"],
            scope_level=Level(d["scope_level"]),
            scope_ids=tuple(d["scope_ids"]),
            kind=d["kind"],
            load_factor=d.get("load_factor"),
            component=d.get("component"),
            offsets=None if d.get("offsets") is None else tuple(d["offsets"]),
            valid_from=parse_hour(d["valid_from"]),
            valid_to=parse_hour(d["valid_to"]),
            author=d["author"],
            created_at=d["created_at"],
        )

    @classmethod
    def new(cls, **kwargs) -> "AdjustmentRecord":
        kwargs.setdefault("id", uuid.uuid4().hex)
        kwargs.setdefault(
            "created_at", dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
        )
        return cls(**kwargs)


def _expand_scope(record: AdjustmentRecord, hierarchies: dict[str, Hierarchy]) -> set[str]:
    """Bus ids covered by the record; utility scope means all member buses."""
    if record.scope_level is Level.BUS:
        return set(record.scope_ids)
    buses: set[str] = set()
    for uid in record.scope_ids:
        h = hierarchies.get(uid)
        if h is None:
            raise StoreError(f"unknown utility {uid!r} in adjustment scope")
        buses.update(b.id for b in h.buses)
    return buses


def _windows_overlap(a: AdjustmentRecord, b: AdjustmentRecord) -> bool:
    return a.valid_from < b.valid_to and b.valid_from < a.valid_to


class ForecastStore:
    """Durable (series, origin, model-tag) -> bundle map plus the journal."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "forecasts").mkdir(parents=True, exist_ok=True)
        self.journal_path = self.root / "adjustments.jsonl"

    # ------------------------------------------------------------- forecasts

    @staticmethod
    def _safe(token: str) -> str:
        return urllib.parse.quote(token, safe="._-")

    def _bundle_path(self, series: SeriesId, origin: int, model_tag: str) -> Path:
        return (
            self.root
            / "forecasts"
            / series.level.value
            / self._safe(series.id)
            / f"{origin}__{self._safe(model_tag)}.json"
        )

    def publish(self, bundle: ForecastBundle, model_tag: str) -> str:
        path = self._bundle_path(bundle.series, bundle.origin, model_tag)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(bundle.to_json_dict(), sort_keys=True, separators=(",", ":"))
        try:
            with path.open("x") as fh:
                fh.write(payload)
        except FileExistsError:
            raise DuplicateKeyError(
                f"forecast already published for ({bundle.series}, "
                f"{format_hour(bundle.origin)}, {model_tag!r}); use a new model tag"
            ) from None
        return str(path.relative_to(self.root))

    def get(self, series: SeriesId, origin: int, model_tag: str) -> ForecastBundle:
        path = self._bundle_path(series, origin, model_tag)
        if not path.exists():
            raise StoreError(
                f"no forecast stored for ({series}, {format_hour(origin)}, {model_tag!r})"
            )
        return ForecastBundle.from_json_dict(json.loads(path.read_text()))

    def has(self, series: SeriesId, origin: int, model_tag: str) -> bool:
        return self._bundle_path(series, origin, model_tag).exists()

    def origins(self, series: SeriesId, model_tag: str) -> list[int]:
        base = self.root / "forecasts" / series.level.value / self._safe(series.id)
        if not base.exists():
            return []
        suffix = f"__{self._safe(model_tag)}.json"
        out = []
        for p in base.iterdir():
            if p.name.endswith(suffix):
                out.append(int(p.name[: -len(suffix)]))
        return sorted(out)

    def series_ids(self, level: Level) -> list[str]:
        base = self.root / "forecasts" / level.value
        if not base.exists():
            return []
        return sorted(urllib.parse.unquote(p.name) for p in base.iterdir() if p.is_dir())

    def model_tags(self) -> list[str]:
        tags = set()
        for p in (self.root / "forecasts").rglob("*.json"):
            tags.add(urllib.parse.unquote(p.name.split("__", 1)[1][: -len(".json")]))
        return sorted(tags)

    # ------------------------------------------------------------ adjustments

    def adjustments(self, active_at: int | None = None) -> list[AdjustmentRecord]:
        if not self.journal_path.exists():
            return []
        records = [
            AdjustmentRecord.from_json_dict(json.loads(line))
            for line in self.journal_path.read_text().splitlines()
            if line.strip()
        ]
        if active_at is not None:
            records = [r for r in records if r.valid_from <= active_at < r.valid_to]
        return records

    def append_adjustment(
        self, record: AdjustmentRecord, hierarchies: dict[str, Hierarchy] | None = None
    ) -> AdjustmentRecord:
        """Validate against the journal (overlapping load factors on one bus
        are rejected) and append."""
        hierarchies = hierarchies or {}
        if record.kind == "load_factor":
            new_buses = _expand_scope(record, hierarchies)
            for existing in self.adjustments():
                if existing.kind != "load_factor" or not _windows_overlap(existing, record):
                    continue
                shared = new_buses & _expand_scope(existing, hierarchies)
                if shared:
                    raise ConflictError(
                        f"load factor overlaps adjustment {existing.id} on buses {sorted(shared)}"
                    )
        with self.journal_path.open("a") as fh:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
        return record


# --------------------------------------------------------------- application


def _apply_to_bundle(
    bundle: ForecastBundle, records: list[AdjustmentRecord], hierarchy: Hierarchy
) -> ForecastBundle:
    hierarchies = {hierarchy.utility.id: hierarchy}
    forecast = bundle.forecast.copy()
    components = {k: v.copy() for k, v in bundle.components.items()} if bundle.components else None
    hours = bundle.hours()
    for record in records:
        mask = (hours >= record.valid_from) & (hours < record.valid_to)
        if not mask.any():
            continue
        if bundle.series.id not in _expand_scope(record, hierarchies):
            continue
        if record.kind == "load_factor":
            forecast[:, mask] *= record.load_factor
            if components is not None:
                for k in components:
                    components[k][mask] *= record.load_factor
        else:
            offsets = np.asarray(record.offsets)
            idx = hours[mask] - record.valid_from
            # a utility-scoped offset is distributed by hierarchy proportions
            share = (
                hierarchy.proportion_of(bundle.series)
                if record.scope_level is Level.UTILITY
                else 1.0
            )
            delta = share * offsets[idx]
            forecast[:, mask] += delta
            if components is not None:
                components[record.component][mask] += delta
    return bundle.copy_with(forecast=forecast, components=components)


@dataclass
class AdjustedView:
    utility: ForecastBundle
    buses: list[ForecastBundle]
    delta_mw: np.ndarray  # utility-level change per hour
    applied: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "utility": self.utility.to_json_dict(),
            "buses": [b.to_json_dict() for b in self.buses],
            "delta_mw": self.delta_mw.tolist(),
            "applied": self.applied,
        }


def apply_adjustments(
    bus_bundles: list[ForecastBundle],
    hierarchy: Hierarchy,
    records: list[AdjustmentRecord],
) -> AdjustedView:
    """Adjusted per-bus bundles and the recomputed bottom-up utility bundle.

    Inputs are untouched; the delta summary is the per-hour MW change of
    the utility median.
    """
    raw_utility = bottom_up(bus_bundles, hierarchy)
    adjusted_buses = [_apply_to_bundle(b, records, hierarchy) for b in bus_bundles]
    adjusted_utility = bottom_up(adjusted_buses, hierarchy)
    return AdjustedView(
        utility=adjusted_utility,
        buses=adjusted_buses,
        delta_mw=adjusted_utility.median() - raw_utility.median(),
        applied=[r.id for r in records],
    )
