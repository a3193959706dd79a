"""HTTP JSON API over a forecast store, actuals, and hierarchies.

Single-operator deployment: many concurrent readers, adjustment writes
serialized through the journal. The optional ``static_dir`` mounts the
operator dashboard as a static single-page app.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .diagnostics import attribute_errors, high_error_analysis
from .errors import ConflictError, DataError, GridcastError, StoreError
from .hierarchy import Hierarchy
from .model.forecast import ForecastBundle
from .series import Level, LoadSeries, SeriesId, format_hour, parse_hour
from .store import AdjustmentRecord, ForecastStore, apply_adjustments

DEFAULT_MODEL_TAG = "hitsgam"


@dataclass
class ServiceDataset:
    """Actuals and hierarchies the service can diagnose against."""

    actuals: dict[SeriesId, LoadSeries] = field(default_factory=dict)
    hierarchies: dict[str, Hierarchy] = field(default_factory=dict)
    model_tag: str = DEFAULT_MODEL_TAG


class AdjustmentPayload(BaseModel):
    scope_level: str
    scope_ids: list[str]
    kind: str
    valid_from: str
    valid_to: str
    author: str = "operator"
    load_factor: float | None = None
    component: str | None = None
    offsets: list[float] | None = None


def _parse_origin(origin: str) -> int:
    try:
        return parse_hour(origin)
    except DataError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _bundle_payload(bundle: ForecastBundle, actuals: dict[SeriesId, LoadSeries]) -> dict:
    payload = bundle.to_json_dict()
    payload["hours"] = [format_hour(int(h)) for h in bundle.hours()]
    series = actuals.get(bundle.series)
    if series is not None:
        values = []
        for h in bundle.hours():
            inside = series.start <= int(h) < series.end
            v = float(series.load[int(h) - series.start]) if inside else None
            values.append(None if v is None or np.isnan(v) else v)
        payload["actuals"] = values
    else:
        payload["actuals"] = None
    return payload


def create_app(
    store: ForecastStore,
    dataset: ServiceDataset | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    dataset = dataset or ServiceDataset()
    app = FastAPI(title="gridcast service", version="1")

    def load_bundle(level: str, sid: str, origin: str, model_tag: str | None) -> ForecastBundle:
        try:
            series = SeriesId(sid, Level(level))
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown level {level!r}") from None
        tag = model_tag or dataset.model_tag
        try:
            return store.get(series, _parse_origin(origin), tag)
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    def hierarchy_for(utility: str) -> Hierarchy:
        h = dataset.hierarchies.get(utility)
        if h is None:
            raise HTTPException(status_code=404, detail=f"unknown utility {utility!r}")
        return h

    def bus_bundles(h: Hierarchy, origin: int, tag: str) -> list[ForecastBundle]:
        try:
            return [store.get(bus, origin, tag) for bus in h.buses]
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/series")
    def series_listing() -> dict:
        utilities = []
        for uid, h in sorted(dataset.hierarchies.items()):
            utilities.append({"id": uid, "buses": [b.id for b in h.buses]})
        return {
            "model_tag": dataset.model_tag,
            "model_tags": store.model_tags(),
            "utilities": utilities,
            "stored": {
                "utility": {
                    sid: [format_hour(o) for o in store.origins(SeriesId(sid, Level.UTILITY), dataset.model_tag)]
                    for sid in store.series_ids(Level.UTILITY)
                },
                "bus": {
                    sid: [format_hour(o) for o in store.origins(SeriesId(sid, Level.BUS), dataset.model_tag)]
                    for sid in store.series_ids(Level.BUS)
                },
            },
        }

    @app.get("/v1/forecast/{level}/{sid}")
    def get_forecast(level: str, sid: str, origin: str, model_tag: str | None = None) -> dict:
        return _bundle_payload(load_bundle(level, sid, origin, model_tag), dataset.actuals)

    @app.get("/v1/forecast/{level}/{sid}/components")
    def get_components(level: str, sid: str, origin: str, model_tag: str | None = None) -> dict:
        bundle = load_bundle(level, sid, origin, model_tag)
        if bundle.components is None:
            raise HTTPException(status_code=404, detail="bundle carries no decomposition")
        return _bundle_payload(bundle, dataset.actuals)

    @app.get("/v1/forecast/utility/{sid}/adjusted")
    def get_adjusted(sid: str, origin: str, model_tag: str | None = None) -> dict:
        h = hierarchy_for(sid)
        origin_hour = _parse_origin(origin)
        tag = model_tag or dataset.model_tag
        bundles = bus_bundles(h, origin_hour, tag)
        view = apply_adjustments(bundles, h, store.adjustments())
        payload = view.to_json_dict()
        payload["utility"] = _bundle_payload(view.utility, dataset.actuals)
        return payload

    @app.get("/v1/adjustments")
    def list_adjustments(active_at: str | None = None) -> dict:
        when = None if active_at is None else _parse_origin(active_at)
        return {"adjustments": [r.to_json_dict() for r in store.adjustments(active_at=when)]}

    @app.post("/v1/adjustments")
    def post_adjustment(
        payload: AdjustmentPayload,
        dry_run: bool = Query(default=False),
        origin: str | None = None,
        model_tag: str | None = None,
    ) -> dict:
        try:
            record = AdjustmentRecord.new(
                scope_level=Level(payload.scope_level),
                scope_ids=tuple(payload.scope_ids),
                kind=payload.kind,
                load_factor=payload.load_factor,
                component=payload.component,
                offsets=None if payload.offsets is None else tuple(payload.offsets),
                valid_from=parse_hour(payload.valid_from),
                valid_to=parse_hour(payload.valid_to),
                author=payload.author,
            )
        except (GridcastError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

        preview = None
        if origin is not None:
            # scope ids must resolve to a hierarchy for a preview
            if payload.scope_level == "utility":
                utility_id = payload.scope_ids[0]
            else:
                owners = [
                    uid
                    for uid, h in dataset.hierarchies.items()
                    if set(payload.scope_ids) <= {b.id for b in h.buses}
                ]
                if not owners:
                    raise HTTPException(status_code=422, detail="scope matches no known hierarchy")
                utility_id = owners[0]
            h = hierarchy_for(utility_id)
            origin_hour = _parse_origin(origin)
            tag = model_tag or dataset.model_tag
            bundles = bus_bundles(h, origin_hour, tag)
            records = store.adjustments() + [record]
            preview = apply_adjustments(bundles, h, records).to_json_dict()

        if dry_run:
            return {"dry_run": True, "record": record.to_json_dict(), "preview": preview}
        try:
            store.append_adjustment(record, dataset.hierarchies)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"dry_run": False, "record": record.to_json_dict(), "preview": preview}

    @app.get("/v1/diagnostics/attribution")
    def get_attribution(
        utility: str,
        origin_from: str = Query(alias="from"),
        origin_to: str = Query(alias="to"),
        top_n: int = 5,
        model_tag: str | None = None,
    ) -> dict:
        h = hierarchy_for(utility)
        tag = model_tag or dataset.model_tag
        lo, hi = _parse_origin(origin_from), _parse_origin(origin_to)
        bundles = []
        for bus in h.buses:
            for o in store.origins(bus, tag):
                if lo <= o <= hi:
                    bundles.append(store.get(bus, o, tag))
        if not bundles:
            raise HTTPException(status_code=404, detail="no stored forecasts in range")
        missing = [s.id for s in h.buses if s not in dataset.actuals]
        if missing:
            raise HTTPException(
                status_code=409, detail=f"actuals not ingested for buses {missing}"
            )
        try:
            result = attribute_errors(bundles, dataset.actuals, h, top_n=top_n)
        except DataError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return result.to_json_dict()

    @app.get("/v1/diagnostics/high-error")
    def get_high_error(
        utility: str,
        origin_from: str = Query(alias="from"),
        origin_to: str = Query(alias="to"),
        quantile: float = 0.10,
        model_tag: str | None = None,
    ) -> dict:
        h = hierarchy_for(utility)
        tag = model_tag or dataset.model_tag
        lo, hi = _parse_origin(origin_from), _parse_origin(origin_to)
        bundles = []
        for bus in h.buses:
            for o in store.origins(bus, tag):
                if lo <= o <= hi:
                    bundles.append(store.get(bus, o, tag))
        if not bundles:
            raise HTTPException(status_code=404, detail="no stored forecasts in range")
        try:
            result = attribute_errors(bundles, dataset.actuals, h, top_n=len(h.buses))
            pos, neg = high_error_analysis(result, quantile=quantile)
        except DataError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"positive": pos.to_json_dict(), "negative": neg.to_json_dict()}

    if static_dir is not None and Path(static_dir).exists():
        static_path = Path(static_dir)

        @app.get("/")
        def index() -> FileResponse:
            return FileResponse(static_path / "index.html")

        app.mount("/", StaticFiles(directory=static_path), name="ui")

    return app
