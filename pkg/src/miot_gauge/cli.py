"""miot-gauge command line: assessor workflows and CI gating.

    miot-gauge new --org "Clinic" --device "Infusion pump" --out pump.json
    miot-gauge set --assessment pump.json --expectation 1 --level no \
        --validation-point "vendor attestation reviewed" --control-types Technical
    miot-gauge validate --assessment pump.json
    miot-gauge score --assessment pump.json --format table
    miot-gauge radar --assessment pump.json --out pump.svg
    miot-gauge plan --assessment pump.json --target 0.8
    miot-gauge diff --old before.json --new after.json
    miot-gauge serve --store-dir ./store

Exit codes are a stable contract: 0 success (for ``score``: risk tier
Acceptable), 1 validation findings present (or non-Acceptable tier,
infeasible plan), 2 usage error, 3 I/O or storage failure, 4 integrity or
catalog mismatch. Every flag has an MIOT_-prefixed environment fallback;
flags win over the environment.
"""

from __future__ import annotations

import functools
import json
import socket
import sys
from fractions import Fraction
from pathlib import Path

import click

from .assessment import (
    Assessment,
    ComplianceLevel,
    ControlType,
    DeviceMeta,
    Finding,
    new_assessment,
    set_response,
    validate,
    Response,
)
from .canonical import parse_fraction, utc_now_iso
from .catalog import ExpectationCatalog, default_catalog, load_catalog
from .errors import (
    CatalogMismatchError,
    ConflictError,
    IncompleteAssessmentError,
    IntegrityError,
    MiotGaugeError,
    NotFoundError,
    ParseError,
    StorageError,
)
from .planner import plan_remediation
from .report import (
    RadarMode,
    radar_spec_from_report,
    render_csv,
    render_diff,
    render_radar,
    render_table,
)
from .scoring import (
    NaMode,
    RiskTier,
    ScoreReport,
    ScoringConfig,
    score_assessment,
)
from .store import Store

EX_OK = 0
EX_FINDINGS = 1
EX_USAGE = 2
EX_IO = 3
EX_INTEGRITY = 4

_LEVEL_ALIASES = {
    "yes": ComplianceLevel.YES,
    "no": ComplianceLevel.NO,
    "pl": ComplianceLevel.PARTIAL_LOW,
    "partial-low": ComplianceLevel.PARTIAL_LOW,
    "pm": ComplianceLevel.PARTIAL_MODERATE,
    "partial-moderate": ComplianceLevel.PARTIAL_MODERATE,
    "ph": ComplianceLevel.PARTIAL_HIGH,
    "partial-high": ComplianceLevel.PARTIAL_HIGH,
    "na": ComplianceLevel.DOES_NOT_APPLY,
    "n/a": ComplianceLevel.DOES_NOT_APPLY,
    "does-not-apply": ComplianceLevel.DOES_NOT_APPLY,
    "alt": ComplianceLevel.ALTERNATE_APPROACH,
    "alternate-approach": ComplianceLevel.ALTERNATE_APPROACH,
    "unknown": ComplianceLevel.UNKNOWN,
}

_NA_MODE_ALIASES = {
    "strict": NaMode.STRICT_PAPER,
    "strictpaper": NaMode.STRICT_PAPER,
    "exclude": NaMode.EXCLUDE_FROM_DENOMINATOR,
    "excludefromdenominator": NaMode.EXCLUDE_FROM_DENOMINATOR,
}

_RADAR_MODE_ALIASES = {
    "per-subgoal": RadarMode.PER_SUB_GOAL,
    "persubgoal": RadarMode.PER_SUB_GOAL,
    "per-goal": RadarMode.PER_GOAL,
    "pergoal": RadarMode.PER_GOAL,
    "per-expectation": RadarMode.PER_EXPECTATION,
    "perexpectation": RadarMode.PER_EXPECTATION,
}


def _parse_level(token: str) -> ComplianceLevel:
    try:
        return ComplianceLevel(token)
    except ValueError:
        pass
    level = _LEVEL_ALIASES.get(token.strip().lower())
    if level is None:
        raise click.UsageError(f"unknown compliance level {token!r}")
    return level


def _parse_na_mode(token: str) -> NaMode:
    mode = _NA_MODE_ALIASES.get(token.strip().lower().replace("-", "").replace("_", ""))
    if mode is None:
        raise click.UsageError(f"unknown na-mode {token!r} (strict|exclude)")
    return mode


def _parse_radar_mode(token: str) -> RadarMode:
    mode = _RADAR_MODE_ALIASES.get(token.strip().lower().replace("_", "-"))
    if mode is None:
        raise click.UsageError(
            f"unknown radar mode {token!r} (per-subgoal|per-goal|per-expectation)"
        )
    return mode


def _parse_flag_fraction(token: str, flag: str) -> Fraction:
    try:
        return parse_fraction(token)
    except ValueError as exc:
        raise click.UsageError(f"{flag}: {exc}") from exc


def _parse_control_types(tokens: str) -> frozenset[ControlType]:
    types = set()
    for token in tokens.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            types.add(ControlType(token.capitalize()))
        except ValueError:
            raise click.UsageError(f"unknown control type {token!r}") from None
    return frozenset(types)


def engine_errors(fn):
    """Map engine errors to the documented exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ParseError, IntegrityError, CatalogMismatchError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EX_INTEGRITY)
        except (NotFoundError, StorageError, ConflictError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EX_IO)
        except IncompleteAssessmentError as exc:
            click.echo(f"error: {exc}", err=True)
            for finding in exc.findings:
                click.echo(_finding_line(finding), err=True)
            sys.exit(EX_FINDINGS)
        except MiotGaugeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EX_FINDINGS)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EX_IO)

    return wrapper


def _finding_line(finding: Finding) -> str:
    where = "document" if finding.expectation_id is None else str(finding.expectation_id)
    return f"{finding.severity.value:<7} [{where}] {finding.message}"


def _load_catalog_flag(path: str | None) -> ExpectationCatalog:
    if path is None:
        return default_catalog()
    return load_catalog(path)


class _Target:
    """An assessment addressed either as a file or as a store id."""

    def __init__(self, path=None, store=None, assessment_id=None):
        self.path = Path(path) if path else None
        self.store = store
        self.assessment_id = assessment_id
        self.revision = 0

    def load(self) -> Assessment:
        if self.path is not None:
            try:
                raw = json.loads(self.path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed assessment file: {exc}") from exc
            return Assessment.from_dict(raw)
        self.revision = self.store.latest_revision(self.assessment_id)
        return self.store.load_assessment(self.assessment_id)

    def save(self, assessment: Assessment) -> None:
        if self.path is not None:
            self.path.write_bytes(assessment.canonical_bytes())
        else:
            self.store.save_assessment(assessment, base_revision=self.revision)


def _resolve_target(assessment: str | None, assessment_id: str | None,
                    store_dir: str | None) -> _Target:
    if assessment and assessment_id:
        raise click.UsageError("pass either --assessment or --id, not both")
    if assessment:
        return _Target(path=assessment)
    if assessment_id:
        if not store_dir:
            raise click.UsageError("--id requires --store-dir")
        return _Target(store=Store(store_dir), assessment_id=assessment_id)
    raise click.UsageError("one of --assessment or --id is required")


def _addressing_options(fn):
    fn = click.option("--assessment", envvar="MIOT_ASSESSMENT",
                      help="Assessment document path.")(fn)
    fn = click.option("--id", "assessment_id", envvar="MIOT_ID",
                      help="Assessment id inside --store-dir.")(fn)
    fn = click.option("--store-dir", envvar="MIOT_STORE_DIR",
                      help="Store directory (with --id).")(fn)
    return fn


def _scoring_options(fn):
    fn = click.option("--catalog", envvar="MIOT_CATALOG",
                      help="Catalog document (default: bundled).")(fn)
    fn = click.option("--na-mode", default="strict", envvar="MIOT_NA_MODE",
                      help="Does-Not-Apply handling: strict|exclude.")(fn)
    fn = click.option("--threshold", default="0.8", envvar="MIOT_THRESHOLD",
                      help="Acceptable-tier threshold fraction.")(fn)
    fn = click.option("--floor", default="0.5", envvar="MIOT_FLOOR",
                      help="Correctable-tier floor fraction.")(fn)
    fn = click.option("--include-optional-in-aggregate", is_flag=True,
                      envvar="MIOT_INCLUDE_OPTIONAL_IN_AGGREGATE",
                      help="Fold answered optional items into the overall score.")(fn)
    return fn


def _build_config(na_mode, threshold, floor, include_optional_in_aggregate) -> ScoringConfig:
    return ScoringConfig(
        na_mode=_parse_na_mode(na_mode),
        acceptable_threshold=_parse_flag_fraction(threshold, "--threshold"),
        correctable_floor=_parse_flag_fraction(floor, "--floor"),
        include_optional_in_aggregate=include_optional_in_aggregate,
    )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="miot-gauge", prog_name="miot-gauge")
def cli():
    """Assess medical IoT devices against NISTIR 8228 expectations."""


@cli.command("new")
@click.option("--org", required=True, envvar="MIOT_ORG", help="Organization name.")
@click.option("--device", required=True, envvar="MIOT_DEVICE", help="Device name.")
@click.option("--manufacturer", default="", envvar="MIOT_MANUFACTURER")
@click.option("--model", default="", envvar="MIOT_MODEL")
@click.option("--firmware", default=None, envvar="MIOT_FIRMWARE")
@click.option("--sbom", default=None, envvar="MIOT_SBOM",
              help="Locator of the device's software bill of materials.")
@click.option("--notes", default=None, envvar="MIOT_NOTES")
@click.option("--include-optional", is_flag=True, envvar="MIOT_INCLUDE_OPTIONAL",
              help="Put the three optional IR8259-series items in scope.")
@click.option("--catalog", envvar="MIOT_CATALOG")
@click.option("--out", envvar="MIOT_OUT", help="Write the draft to this file.")
@click.option("--store-dir", envvar="MIOT_STORE_DIR",
              help="Create the draft inside this store instead of a file.")
@engine_errors
def cmd_new(org, device, manufacturer, model, firmware, sbom, notes,
            include_optional, catalog, out, store_dir):
    """Create a Draft assessment and print its id."""
    if bool(out) == bool(store_dir):
        raise click.UsageError("pass exactly one of --out or --store-dir")
    cat = _load_catalog_flag(catalog)
    meta = DeviceMeta(
        organization=org, device_name=device, manufacturer=manufacturer,
        model=model, firmware_version=firmware, sbom_ref=sbom, notes=notes,
    )
    draft = new_assessment(meta, cat, include_optional)
    if out:
        Path(out).write_bytes(draft.canonical_bytes())
    else:
        store = Store(store_dir)
        store.put_catalog(cat)
        store.save_assessment(draft, base_revision=None)
    click.echo(draft.id)


@cli.command("set")
@_addressing_options
@click.option("--catalog", envvar="MIOT_CATALOG")
@click.option("--expectation", required=True, type=int, envvar="MIOT_EXPECTATION")
@click.option("--level", required=True, envvar="MIOT_LEVEL",
              help="Yes|No|PL|PM|PH|NA|Alt|Unknown (or full names).")
@click.option("--validation-point", default="", envvar="MIOT_VALIDATION_POINT",
              help="Short statement of the auditable proof.")
@click.option("--validation-tool", default=None, envvar="MIOT_VALIDATION_TOOL")
@click.option("--control-types", default="", envvar="MIOT_CONTROL_TYPES",
              help="Comma-separated: Administrative,Technical,Physical.")
@click.option("--comment", default=None, envvar="MIOT_COMMENT")
@engine_errors
def cmd_set(assessment, assessment_id, store_dir, catalog, expectation, level,
            validation_point, validation_tool, control_types, comment):
    """Record one response on an assessment."""
    target = _resolve_target(assessment, assessment_id, store_dir)
    cat = _load_catalog_flag(catalog)
    current = target.load()
    response = Response(
        expectation_id=expectation,
        level=_parse_level(level),
        validation_point=validation_point,
        validation_tool=validation_tool,
        control_types=_parse_control_types(control_types),
        comments=comment,
    )
    target.save(set_response(current, cat, response))


@cli.command("validate")
@_addressing_options
@click.option("--catalog", envvar="MIOT_CATALOG")
@click.option("--format", "fmt", default="text", envvar="MIOT_FORMAT",
              type=click.Choice(["text", "json"]))
@engine_errors
def cmd_validate(assessment, assessment_id, store_dir, catalog, fmt):
    """List validation findings; exit 1 when any are present."""
    target = _resolve_target(assessment, assessment_id, store_dir)
    cat = _load_catalog_flag(catalog)
    findings = validate(target.load(), cat)
    if fmt == "json":
        from .canonical import canonical_dumps

        sys.stdout.write(canonical_dumps([f.to_dict() for f in findings]))
    else:
        for finding in findings:
            click.echo(_finding_line(finding))
        if not findings:
            click.echo("no findings")
    sys.exit(EX_FINDINGS if findings else EX_OK)


@cli.command("score")
@_addressing_options
@_scoring_options
@click.option("--format", "fmt", default="table", envvar="MIOT_FORMAT",
              type=click.Choice(["table", "csv", "json"]))
@click.option("--no-record", is_flag=True, envvar="MIOT_NO_RECORD",
              help="Do not append a Scored event when scoring from a store.")
@engine_errors
def cmd_score(assessment, assessment_id, store_dir, catalog, na_mode, threshold,
              floor, include_optional_in_aggregate, fmt, no_record):
    """Score an assessment; exit 0 only when the risk tier is Acceptable."""
    target = _resolve_target(assessment, assessment_id, store_dir)
    cat = _load_catalog_flag(catalog)
    config = _build_config(na_mode, threshold, floor, include_optional_in_aggregate)
    report = score_assessment(target.load(), cat, config)
    if target.store is not None and not no_record:
        target.store.record_score(target.assessment_id, report)
    if fmt == "json":
        sys.stdout.write(report.canonical_bytes().decode("utf-8"))
    elif fmt == "csv":
        sys.stdout.write(render_csv(report, cat))
    else:
        sys.stdout.write(render_table(report, cat))
    sys.exit(EX_OK if report.risk_tier is RiskTier.ACCEPTABLE else EX_FINDINGS)


@cli.command("radar")
@_addressing_options
@_scoring_options
@click.option("--mode", default="per-subgoal", envvar="MIOT_MODE",
              help="per-subgoal|per-goal|per-expectation.")
@click.option("--threshold-ring", default=None, envvar="MIOT_THRESHOLD_RING",
              help="Draw a reference polygon at this fraction.")
@click.option("--size", default=640, type=int, envvar="MIOT_SIZE")
@click.option("--out", required=True, envvar="MIOT_OUT",
              help="Output SVG path ('-' for stdout).")
@click.option("--no-timestamp", is_flag=True, envvar="MIOT_NO_TIMESTAMP",
              help="Omit the generation timestamp for byte-stable output.")
@engine_errors
def cmd_radar(assessment, assessment_id, store_dir, catalog, na_mode, threshold,
              floor, include_optional_in_aggregate, mode, threshold_ring, size,
              out, no_timestamp):
    """Render the radar (spider) chart of a scored assessment."""
    target = _resolve_target(assessment, assessment_id, store_dir)
    cat = _load_catalog_flag(catalog)
    config = _build_config(na_mode, threshold, floor, include_optional_in_aggregate)
    report = score_assessment(target.load(), cat, config)
    ring = (
        _parse_flag_fraction(threshold_ring, "--threshold-ring")
        if threshold_ring is not None
        else None
    )
    spec = radar_spec_from_report(report, cat, _parse_radar_mode(mode), ring, size)
    metadata = {
        "assessment_id": report.assessment_id,
        "catalog_checksum": report.catalog_checksum,
        "config": report.config.to_dict(),
    }
    if not no_timestamp:
        metadata["generated_at"] = utc_now_iso()
    svg = render_radar(spec, metadata)
    if out == "-":
        sys.stdout.write(svg)
    else:
        Path(out).write_text(svg, encoding="utf-8")


@cli.command("plan")
@_addressing_options
@_scoring_options
@click.option("--target", "target_fraction", required=True, envvar="MIOT_TARGET",
              help="Overall fraction to reach, e.g. 0.8.")
@click.option("--format", "fmt", default="text", envvar="MIOT_FORMAT",
              type=click.Choice(["text", "json"]))
@engine_errors
def cmd_plan(assessment, assessment_id, store_dir, catalog, na_mode, threshold,
             floor, include_optional_in_aggregate, target_fraction, fmt):
    """Plan the smallest set of upgrades reaching a target; exit 1 if infeasible."""
    target = _resolve_target(assessment, assessment_id, store_dir)
    cat = _load_catalog_flag(catalog)
    config = _build_config(na_mode, threshold, floor, include_optional_in_aggregate)
    loaded = target.load()
    plan = plan_remediation(
        loaded, cat, config,
        _parse_flag_fraction(target_fraction, "--target"),
    )
    if fmt == "json":
        sys.stdout.write(plan.canonical_bytes().decode("utf-8"))
    else:
        from .canonical import fraction_to_decimal, fraction_to_percent

        click.echo(f"Remediation plan: target {fraction_to_decimal(plan.target_fraction)}")
        for delta in plan.deltas:
            current = loaded.responses[delta.expectation_id].level.value
            click.echo(
                f"  upgrade expectation {delta.expectation_id} "
                f"({current} -> {delta.proposed_level.value})"
            )
        if not plan.deltas:
            click.echo("  nothing to do")
        click.echo(
            f"Projected: {fraction_to_decimal(plan.projected_fraction)} "
            f"({fraction_to_percent(plan.projected_fraction)}%)  "
            f"feasible: {'yes' if plan.feasible else 'no'}"
        )
    sys.exit(EX_OK if plan.feasible else EX_FINDINGS)


@cli.command("diff")
@click.option("--old", "old_path", required=True, envvar="MIOT_OLD",
              help="Older score report (JSON).")
@click.option("--new", "new_path", required=True, envvar="MIOT_NEW",
              help="Newer score report (JSON).")
@click.option("--catalog", envvar="MIOT_CATALOG")
@engine_errors
def cmd_diff(old_path, new_path, catalog):
    """Show level changes and the overall delta between two score reports."""
    cat = _load_catalog_flag(catalog)
    reports = []
    for path in (old_path, new_path):
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed score report {path}: {exc}") from exc
        reports.append(ScoreReport.from_dict(raw))
    sys.stdout.write(render_diff(reports[0], reports[1], cat))


@cli.command("history")
@click.option("--id", "assessment_id", required=True, envvar="MIOT_ID")
@click.option("--store-dir", required=True, envvar="MIOT_STORE_DIR")
@click.option("--format", "fmt", default="text", envvar="MIOT_FORMAT",
              type=click.Choice(["text", "json"]))
@engine_errors
def cmd_history(assessment_id, store_dir, fmt):
    """Print the append-only event history of an assessment."""
    events = Store(store_dir).list_history(assessment_id)
    if fmt == "json":
        from .canonical import canonical_dumps

        sys.stdout.write(canonical_dumps([e.to_dict() for e in events]))
    else:
        for event in events:
            click.echo(f"{event.sequence:>4}  {event.timestamp}  {event.kind.value}")


@cli.command("serve")
@click.option("--addr", default="127.0.0.1:8080", envvar="MIOT_ADDR",
              help="host:port to bind.")
@click.option("--store-dir", required=True, envvar="MIOT_STORE_DIR")
@click.option("--catalog", envvar="MIOT_CATALOG")
@click.option("--ui-dir", default=None, envvar="MIOT_UI_DIR",
              help="Directory of built UI assets to serve at /.")
@click.option("--allow-external", is_flag=True, envvar="MIOT_ALLOW_EXTERNAL",
              help="Permit binding to a non-loopback address.")
@engine_errors
def cmd_serve(addr, store_dir, catalog, ui_dir, allow_external):
    """Serve the HTTP API (and UI) until interrupted."""
    import uvicorn

    from .server import create_app

    host, _, port_text = addr.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        raise click.UsageError(f"malformed --addr {addr!r} (want host:port)") from None
    if host not in ("127.0.0.1", "::1", "localhost") and not allow_external:
        raise click.UsageError(
            f"refusing non-loopback bind {host!r} without --allow-external"
        )

    store = Store(store_dir)
    cat = _load_catalog_flag(catalog)
    app = create_app(store, cat, ui_dir=ui_dir)

    sock = socket.socket(socket.AF_INET6 if ":" in host else socket.AF_INET)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host if host != "localhost" else "127.0.0.1", port))
    click.echo(f"listening on {host}:{port}", err=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
