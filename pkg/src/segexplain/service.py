"""HTTP service: dataset registry plus explain queries for the explorer UI.

Datasets are uploaded once and held immutably in memory; explain requests
never mutate shared state, so any number of concurrent readers is safe. A
bounded worker semaphore keeps heavy explain computations from starving the
event loop's thread pool.
"""

from __future__ import annotations

import json
import threading
import uuid
from datetime import date
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .dataset import AggSpec, DataError, Explanation, Relation, load_csv, materialize_cube
from .pipeline import ExplainOptions, ExplainRequest, explain_evolving

DEFAULT_UPLOAD_CAP_MB = 256


class ExplainBody(BaseModel):
    dataset_id: str
    time_attr: str | None = None  # defaults to the dataset's time attribute
    measure: str | None = None
    agg: str = "sum"
    explain_by: list[str] = Field(default_factory=list)
    m: int = 3
    beta_max: int = 3
    k: int | str = "auto"
    k_max: int = 20
    smooth_window: int = 1
    time_range: list | None = None
    filter_ratio: float = 0.001
    guess_verify: bool = True
    sketching: bool = True
    variance_metric: str = "tse"


class _Registry:
    """Single-writer, many-reader dataset store."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._datasets: dict[str, tuple[Relation, dict]] = {}

    def add(self, relation: Relation) -> dict:
        handle = {
            "id": uuid.uuid4().hex[:12],
            "schema": [
                {"name": a.name, "kind": a.kind, "value_type": a.value_type}
                for a in relation.schema
            ],
            "row_count": relation.row_count,
            "distinct_time_count": relation.distinct_time_count(),
        }
        with self._lock:
            self._datasets[handle["id"]] = (relation, handle)
        return handle

    def get(self, dataset_id: str) -> tuple[Relation, dict]:
        try:
            return self._datasets[dataset_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown dataset {dataset_id!r}") from None

    def handles(self) -> list[dict]:
        return [h for _, h in self._datasets.values()]


def _stamp(value):
    return value.isoformat() if isinstance(value, date) else value


def create_app(
    static_dir: str | None = None,
    upload_cap_mb: int = DEFAULT_UPLOAD_CAP_MB,
    max_workers: int = 4,
) -> FastAPI:
    app = FastAPI(title="segexplain", docs_url="/api/docs", openapi_url="/api/openapi.json")
    registry = _Registry()
    workers = threading.Semaphore(max_workers)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_req: Request, exc: RequestValidationError):
        fields = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": "malformed request", "errors": fields})

    @app.exception_handler(DataError)
    async def semantic_error(_req: Request, exc: DataError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(Exception)
    async def internal_error(_req: Request, _exc: Exception):
        # never leak internals
        return JSONResponse(status_code=500, content={"detail": "internal error"})

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/datasets", status_code=201)
    async def upload_dataset(
        request: Request,
        time_attr: str = Query(...),
        hints: str | None = Query(default=None, description="JSON map column -> kind"),
    ):
        body = await request.body()
        if len(body) > upload_cap_mb * 1024 * 1024:
            raise HTTPException(status_code=413, detail=f"upload exceeds {upload_cap_mb} MB cap")
        type_hints = json.loads(hints) if hints else None
        relation = load_csv(body, time_attr=time_attr, type_hints=type_hints)
        return registry.add(relation)

    @app.get("/api/datasets")
    def list_datasets():
        return registry.handles()

    @app.get("/api/datasets/{dataset_id}/schema")
    def dataset_schema(dataset_id: str):
        _, handle = registry.get(dataset_id)
        return handle

    @app.get("/api/datasets/{dataset_id}/series")
    def dataset_series(
        dataset_id: str,
        measure: str | None = None,
        agg: str = "sum",
        predicate: list[str] = Query(default=[]),
    ):
        relation, _ = registry.get(dataset_id)
        spec = AggSpec.parse(measure, agg)
        preds = []
        for item in predicate:
            if "=" not in item:
                raise DataError(f"bad predicate {item!r}; expected attr=value")
            attr, raw = item.split("=", 1)
            preds.append((attr, _coerce(relation, attr, raw)))
        explanations = [Explanation(tuple(preds))] if preds else []
        cube = materialize_cube(relation, spec, explanations)
        values = cube.values[0] if explanations else cube.overall_values
        return {
            "timestamps": [_stamp(t) for t in cube.timestamps],
            "values": values.tolist(),
        }

    @app.post("/api/explain")
    def explain(body: ExplainBody):
        relation, handle = registry.get(body.dataset_id)
        request = ExplainRequest(
            time_attr=body.time_attr or relation.time_attr,
            agg=body.agg,
            measure=body.measure,
            explain_by=body.explain_by,
            m=body.m,
            beta_max=body.beta_max,
            k=body.k if body.k == "auto" else int(body.k),
            k_max=body.k_max,
            smooth_window=body.smooth_window,
            time_range=_parse_range(relation, body.time_range),
            opts=ExplainOptions(
                filter_ratio=body.filter_ratio,
                guess_verify=body.guess_verify,
                sketching=body.sketching,
                variance_metric=body.variance_metric,
            ),
        )
        with workers:
            result = explain_evolving(relation, request)
        return json.loads(result.to_json())

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _coerce(relation: Relation, attr: str, raw: str):
    """Parse a predicate literal to the attribute's value type."""
    vtype = relation.attribute(attr).value_type
    if vtype == "integer":
        return int(raw)
    if vtype == "decimal":
        return float(raw)
    if vtype == "date":
        return date.fromisoformat(raw)
    return raw


def _parse_range(relation: Relation, time_range: list | None):
    if not time_range:
        return None
    if len(time_range) != 2:
        raise DataError("time_range must be [start, end]")
    vtype = relation.attribute(relation.time_attr).value_type
    lo, hi = time_range
    if vtype == "date":
        lo = date.fromisoformat(lo) if lo is not None else None
        hi = date.fromisoformat(hi) if hi is not None else None
    return (lo, hi)


def serve(port: int = 8000, static_dir: str | None = None, host: str = "127.0.0.1") -> None:
    """Run the HTTP service (blocking)."""
    import uvicorn

    uvicorn.run(create_app(static_dir=static_dir), host=host, port=port, log_level="warning")
