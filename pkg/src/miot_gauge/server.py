"""Embedded HTTP API under /api/v1.

Handlers are thin wrappers over the engine modules: bodies are parsed
manually (floats arrive as strings so scores stay exact), responses are the
canonical document bytes, and all state lives in the store; restarting the
process loses nothing. Writes use optimistic concurrency: GET returns an
ETag carrying the revision, and PUT requires a matching If-Match.

Error bodies carry a stable machine code::

    {"status": 422, "code": "incomplete_assessment", "message": "...",
     "findings": [...]}
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .assessment import ComplianceLevel, DeviceMeta, new_assessment, set_response
from .assessment import Response as AssessmentResponse
from .canonical import canonical_bytes, parse_fraction
from .catalog import ExpectationCatalog
from .errors import (
    CatalogMismatchError,
    ConflictError,
    DomainError,
    DowngradeRejectedError,
    IncompleteAssessmentError,
    IntegrityError,
    InvalidDeviceError,
    MiotGaugeError,
    NotFoundError,
    OutOfScopeError,
    ParseError,
    StorageError,
    TooFewAxesError,
    ValidationError,
)
from .planner import WhatIfDelta, plan_remediation, what_if
from .report import RadarMode, radar_spec_from_report, render_radar
from .scoring import NaMode, ScoringConfig, score_assessment
from .store import Store

_STATUS_BY_ERROR = (
    (NotFoundError, 404),
    (ConflictError, 409),
    (CatalogMismatchError, 409),
    (IncompleteAssessmentError, 422),
    (ValidationError, 422),
    (OutOfScopeError, 422),
    (DowngradeRejectedError, 422),
    (DomainError, 422),
    (InvalidDeviceError, 422),
    (TooFewAxesError, 422),
    (ParseError, 400),
    (IntegrityError, 400),
    (StorageError, 500),
)

_NA_MODES = {
    "strict": NaMode.STRICT_PAPER,
    "strictpaper": NaMode.STRICT_PAPER,
    "exclude": NaMode.EXCLUDE_FROM_DENOMINATOR,
    "excludefromdenominator": NaMode.EXCLUDE_FROM_DENOMINATOR,
}

_RADAR_MODES = {
    "per-subgoal": RadarMode.PER_SUB_GOAL,
    "persubgoal": RadarMode.PER_SUB_GOAL,
    "per-goal": RadarMode.PER_GOAL,
    "pergoal": RadarMode.PER_GOAL,
    "per-expectation": RadarMode.PER_EXPECTATION,
    "perexpectation": RadarMode.PER_EXPECTATION,
}


def _http_status(exc: MiotGaugeError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return status
    return 500


async def _read_json(request: Request) -> dict:
    body = await request.body()
    try:
        # Floats parse as strings: scores are exact decimal strings on the
        # wire and must never round-trip through binary floating point.
        return json.loads(body, parse_float=str)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed request body: {exc}") from exc


def _json_bytes(data: bytes, status_code: int = 200, headers: dict | None = None) -> Response:
    return Response(
        content=data,
        status_code=status_code,
        media_type="application/json",
        headers=headers or {},
    )


def _etag(revision: int) -> str:
    return f'"{revision}"'


def _parse_level(token) -> ComplianceLevel:
    try:
        return ComplianceLevel(token)
    except ValueError:
        raise ParseError(f"unknown compliance level {token!r}") from None


def _parse_if_match(request: Request) -> int:
    value = request.headers.get("if-match")
    if value is None:
        raise ConflictError("If-Match header required for writes")
    token = value.strip().removeprefix("W/").strip('"')
    try:
        return int(token)
    except ValueError:
        raise ConflictError(f"malformed If-Match {value!r}") from None


def _config_from_query(params) -> ScoringConfig:
    na_token = (params.get("na_mode") or "strict").lower().replace("-", "").replace("_", "")
    na_mode = _NA_MODES.get(na_token)
    if na_mode is None:
        raise DomainError(f"unknown na_mode {params.get('na_mode')!r}")
    try:
        threshold = parse_fraction(params.get("threshold") or "0.8")
        floor = parse_fraction(params.get("floor") or "0.5")
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    include_optional = (params.get("include_optional") or "").lower() in ("1", "true", "yes")
    return ScoringConfig(
        na_mode=na_mode,
        acceptable_threshold=threshold,
        correctable_floor=floor,
        include_optional_in_aggregate=include_optional,
    )


def create_app(store: Store, catalog: ExpectationCatalog, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="miot-gauge", docs_url=None, redoc_url=None, openapi_url=None)
    store.put_catalog(catalog)

    @app.exception_handler(MiotGaugeError)
    async def engine_error_handler(request: Request, exc: MiotGaugeError):
        status = _http_status(exc)
        body = {"status": status, "code": exc.code, "message": str(exc)}
        if isinstance(exc, IncompleteAssessmentError):
            body["findings"] = [f.to_dict() for f in exc.findings]
        return JSONResponse(status_code=status, content=body)

    def _catalog_for(assessment) -> ExpectationCatalog:
        if assessment.catalog_checksum == catalog.checksum:
            return catalog
        return store.get_catalog(assessment.catalog_checksum)

    @app.get("/api/v1/catalog")
    async def get_catalog():
        return _json_bytes(catalog.canonical_bytes())

    @app.post("/api/v1/assessments", status_code=201)
    async def create_assessment(request: Request):
        body = await _read_json(request)
        if not isinstance(body, dict) or "device" not in body:
            raise ParseError("body must be an object with a 'device' field")
        device = DeviceMeta.from_dict(body["device"])
        include_optional = bool(body.get("include_optional", False))
        draft = new_assessment(device, catalog, include_optional)
        revision = store.save_assessment(draft, base_revision=None)
        return _json_bytes(
            draft.canonical_bytes(),
            status_code=201,
            headers={
                "ETag": _etag(revision),
                "Location": f"/api/v1/assessments/{draft.id}",
            },
        )

    @app.get("/api/v1/assessments/{assessment_id}")
    async def get_assessment(assessment_id: str, request: Request):
        snapshot = store.load_assessment(assessment_id)
        revision = store.latest_revision(assessment_id)
        etag = _etag(revision)
        if request.headers.get("if-none-match", "").strip().removeprefix("W/") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return _json_bytes(snapshot.canonical_bytes(), headers={"ETag": etag})

    @app.put("/api/v1/assessments/{assessment_id}/responses/{expectation_id}")
    async def put_response(assessment_id: str, expectation_id: int, request: Request):
        base_revision = _parse_if_match(request)
        body = await _read_json(request)
        if not isinstance(body, dict):
            raise ParseError("body must be a response object")
        body.setdefault("expectation_id", expectation_id)
        if body["expectation_id"] != expectation_id:
            raise ParseError(
                "body expectation_id does not match the request path"
            )
        response = AssessmentResponse.from_dict(body)

        def mutate(current):
            return set_response(current, _catalog_for(current), response)

        snapshot, revision = store.update_assessment(assessment_id, base_revision, mutate)
        return _json_bytes(snapshot.canonical_bytes(), headers={"ETag": _etag(revision)})

    @app.get("/api/v1/assessments/{assessment_id}/score")
    async def get_score(assessment_id: str, request: Request):
        snapshot = store.load_assessment(assessment_id)
        config = _config_from_query(request.query_params)
        report = score_assessment(snapshot, _catalog_for(snapshot), config)
        return _json_bytes(report.canonical_bytes())

    @app.post("/api/v1/assessments/{assessment_id}/what-if")
    async def post_what_if(assessment_id: str, request: Request):
        snapshot = store.load_assessment(assessment_id)
        config = _config_from_query(request.query_params)
        body = await _read_json(request)
        raw_deltas = body.get("deltas") if isinstance(body, dict) else None
        if raw_deltas is None:
            raise ParseError("body must be an object with a 'deltas' array")
        deltas = []
        for raw in raw_deltas:
            try:
                deltas.append(
                    WhatIfDelta(
                        expectation_id=int(raw["expectation_id"]),
                        proposed_level=_parse_level(raw["proposed_level"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed delta: {exc}") from exc
        report = what_if(snapshot, _catalog_for(snapshot), config, deltas)
        return _json_bytes(report.canonical_bytes())

    @app.post("/api/v1/assessments/{assessment_id}/plan")
    async def post_plan(assessment_id: str, request: Request):
        snapshot = store.load_assessment(assessment_id)
        config = _config_from_query(request.query_params)
        body = await _read_json(request)
        if not isinstance(body, dict) or "target" not in body:
            raise ParseError("body must be an object with a 'target' field")
        try:
            target = parse_fraction(body["target"])
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        plan = plan_remediation(snapshot, _catalog_for(snapshot), config, target)
        return _json_bytes(plan.canonical_bytes())

    @app.get("/api/v1/assessments/{assessment_id}/radar")
    async def get_radar(assessment_id: str, request: Request):
        snapshot = store.load_assessment(assessment_id)
        cat = _catalog_for(snapshot)
        config = _config_from_query(request.query_params)
        report = score_assessment(snapshot, cat, config)
        mode_token = (request.query_params.get("mode") or "per-subgoal").lower()
        mode = _RADAR_MODES.get(mode_token.replace("_", "-"))
        if mode is None:
            raise DomainError(f"unknown radar mode {mode_token!r}")
        ring = request.query_params.get("threshold_ring")
        threshold_ring = None
        if ring is not None:
            try:
                threshold_ring = parse_fraction(ring)
            except ValueError as exc:
                raise DomainError(str(exc)) from exc
        spec = radar_spec_from_report(report, cat, mode, threshold_ring)
        # No timestamp: GET responses stay deterministic and cacheable.
        metadata = {
            "assessment_id": report.assessment_id,
            "catalog_checksum": report.catalog_checksum,
            "config": report.config.to_dict(),
        }
        return Response(content=render_radar(spec, metadata), media_type="image/svg+xml")

    @app.get("/api/v1/assessments/{assessment_id}/history")
    async def get_history(assessment_id: str):
        events = store.list_history(assessment_id)
        return _json_bytes(canonical_bytes([e.to_dict() for e in events]))

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
