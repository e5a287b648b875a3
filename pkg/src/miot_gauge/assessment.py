"""Device assessments: metadata, per-expectation responses, validation.

An assessment pins the catalog version and checksum it was created against,
and scoring later refuses any catalog whose checksum differs. Assessment
values are immutable snapshots; ``set_response`` returns a new snapshot with
``updated_at`` refreshed and the lifecycle status recomputed.

Validation separates Error findings, which block the Complete status and
scoring (missing responses, a Does-Not-Apply answer without its required
explanation, an Alternate-Approach answer without evidence), from Warnings,
which are recorded but never block (missing validation point on affirmative
answers, empty control types).
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from enum import Enum

from .canonical import canonical_bytes, utc_now_iso
from .catalog import ExpectationCatalog
from .errors import (
    CatalogMismatchError,
    InvalidDeviceError,
    OutOfScopeError,
    ParseError,
    ValidationError,
)


class ComplianceLevel(str, Enum):
    YES = "Yes"
    NO = "No"
    PARTIAL_LOW = "PartialLow"
    PARTIAL_MODERATE = "PartialModerate"
    PARTIAL_HIGH = "PartialHigh"
    DOES_NOT_APPLY = "DoesNotApply"
    ALTERNATE_APPROACH = "AlternateApproach"
    UNKNOWN = "Unknown"


# Assessor guidance attached to the level definitions: choose Yes once more
# than three quarters of an expectation's requirements are satisfied.
LEVEL_GUIDANCE = {
    ComplianceLevel.YES: "Fully satisfied (more than 75% counts as full compliance).",
    ComplianceLevel.NO: "Not satisfied.",
    ComplianceLevel.PARTIAL_LOW: "Limited compliance (0%-25%).",
    ComplianceLevel.PARTIAL_MODERATE: "Moderate compliance (25%-50%).",
    ComplianceLevel.PARTIAL_HIGH: "High compliance (50%-75%).",
    ComplianceLevel.DOES_NOT_APPLY: "Not applicable to this device; explanation required.",
    ComplianceLevel.ALTERNATE_APPROACH: "Satisfied through an alternate, evidenced approach.",
    ComplianceLevel.UNKNOWN: "Compliance cannot be determined.",
}


class ControlType(str, Enum):
    ADMINISTRATIVE = "Administrative"
    TECHNICAL = "Technical"
    PHYSICAL = "Physical"


CONTROL_TYPE_ORDER = (
    ControlType.ADMINISTRATIVE,
    ControlType.TECHNICAL,
    ControlType.PHYSICAL,
)


class AssessmentStatus(str, Enum):
    DRAFT = "Draft"
    COMPLETE = "Complete"


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class Finding:
    expectation_id: int | None
    severity: Severity
    message: str

    def to_dict(self) -> dict:
        return {
            "expectation_id": self.expectation_id,
            "severity": self.severity.value,
            "message": self.message,
        }


@dataclass(frozen=True)
class Response:
    expectation_id: int
    level: ComplianceLevel
    validation_point: str = ""
    validation_tool: str | None = None
    control_types: frozenset[ControlType] = frozenset()
    comments: str | None = None

    def to_dict(self) -> dict:
        return {
            "expectation_id": self.expectation_id,
            "level": self.level.value,
            "validation_point": self.validation_point,
            "validation_tool": self.validation_tool,
            "control_types": [
                ct.value for ct in CONTROL_TYPE_ORDER if ct in self.control_types
            ],
            "comments": self.comments,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Response":
        _require_fields(
            raw,
            {"expectation_id": int, "level": str},
            {
                "validation_point": str,
                "validation_tool": str,
                "control_types": list,
                "comments": str,
            },
            "response",
        )
        try:
            level = ComplianceLevel(raw["level"])
        except ValueError:
            raise ParseError(f"response: unknown compliance level {raw['level']!r}") from None
        types = []
        for token in raw.get("control_types") or []:
            try:
                types.append(ControlType(token))
            except ValueError:
                raise ParseError(f"response: unknown control type {token!r}") from None
        return cls(
            expectation_id=raw["expectation_id"],
            level=level,
            validation_point=raw.get("validation_point") or "",
            validation_tool=raw.get("validation_tool"),
            control_types=frozenset(types),
            comments=raw.get("comments"),
        )


@dataclass(frozen=True)
class DeviceMeta:
    organization: str
    device_name: str
    manufacturer: str = ""
    model: str = ""
    firmware_version: str | None = None
    sbom_ref: str | None = None
    notes: str | None = None

    def to_dict(self) -> dict:
        return {
            "organization": self.organization,
            "device_name": self.device_name,
            "manufacturer": self.manufacturer,
            "model": self.model,
            "firmware_version": self.firmware_version,
            "sbom_ref": self.sbom_ref,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DeviceMeta":
        _require_fields(
            raw,
            {"organization": str, "device_name": str},
            {
                "manufacturer": str,
                "model": str,
                "firmware_version": str,
                "sbom_ref": str,
                "notes": str,
            },
            "device",
        )
        return cls(
            organization=raw["organization"],
            device_name=raw["device_name"],
            manufacturer=raw.get("manufacturer") or "",
            model=raw.get("model") or "",
            firmware_version=raw.get("firmware_version"),
            sbom_ref=raw.get("sbom_ref"),
            notes=raw.get("notes"),
        )


@dataclass(frozen=True)
class Assessment:
    id: str
    device: DeviceMeta
    catalog_version: str
    catalog_checksum: str
    include_optional: bool
    created_at: str
    updated_at: str
    status: AssessmentStatus
    responses: dict[int, Response] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "device": self.device.to_dict(),
            "catalog_version": self.catalog_version,
            "catalog_checksum": self.catalog_checksum,
            "include_optional": self.include_optional,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "status": self.status.value,
            "responses": {
                str(eid): resp.to_dict() for eid, resp in self.responses.items()
            },
        }

    def canonical_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())

    @classmethod
    def from_dict(cls, raw: dict) -> "Assessment":
        _require_fields(
            raw,
            {
                "id": str,
                "device": dict,
                "catalog_version": str,
                "catalog_checksum": str,
                "include_optional": bool,
                "created_at": str,
                "updated_at": str,
                "status": str,
                "responses": dict,
            },
            {},
            "assessment",
        )
        try:
            status = AssessmentStatus(raw["status"])
        except ValueError:
            raise ParseError(f"assessment: unknown status {raw['status']!r}") from None
        responses: dict[int, Response] = {}
        for key, value in raw["responses"].items():
            try:
                eid = int(key)
            except ValueError:
                raise ParseError(f"assessment: non-integer response key {key!r}") from None
            resp = Response.from_dict(value)
            if resp.expectation_id != eid:
                raise ParseError(
                    f"assessment: response key {eid} does not match "
                    f"expectation_id {resp.expectation_id}"
                )
            responses[eid] = resp
        return cls(
            id=raw["id"],
            device=DeviceMeta.from_dict(raw["device"]),
            catalog_version=raw["catalog_version"],
            catalog_checksum=raw["catalog_checksum"],
            include_optional=raw["include_optional"],
            created_at=raw["created_at"],
            updated_at=raw["updated_at"],
            status=status,
            responses=responses,
        )


def _require_fields(obj, required: dict, optional: dict, where: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError(f"{where}: unknown field {key!r}")
    for key, types in required.items():
        if key not in obj:
            raise ParseError(f"{where}: missing field {key!r}")
        if not isinstance(obj[key], types) or (
            types is int and isinstance(obj[key], bool)
        ):
            raise ParseError(f"{where}: field {key!r} has wrong type")
    for key, types in optional.items():
        if key in obj and obj[key] is not None and not isinstance(obj[key], types):
            raise ParseError(f"{where}: field {key!r} has wrong type")


def new_assessment(
    device: DeviceMeta,
    catalog: ExpectationCatalog,
    include_optional: bool = False,
    *,
    now: str | None = None,
    assessment_id: str | None = None,
) -> Assessment:
    """Create a Draft assessment pinned to ``catalog``."""
    if not device.organization.strip():
        raise InvalidDeviceError("device organization must be non-empty")
    if not device.device_name.strip():
        raise InvalidDeviceError("device name must be non-empty")
    stamp = now or utc_now_iso()
    return Assessment(
        id=assessment_id or str(uuid.uuid4()),
        device=device,
        catalog_version=catalog.version,
        catalog_checksum=catalog.checksum,
        include_optional=include_optional,
        created_at=stamp,
        updated_at=stamp,
        status=AssessmentStatus.DRAFT,
        responses={},
    )


def _check_pinned(assessment: Assessment, catalog: ExpectationCatalog) -> None:
    if assessment.catalog_checksum != catalog.checksum:
        raise CatalogMismatchError(
            f"assessment is pinned to catalog {assessment.catalog_checksum[:12]}..., "
            f"got {catalog.checksum[:12]}..."
        )


def response_findings(response: Response) -> list[Finding]:
    """Findings for one response, independent of coverage."""
    findings = []
    if response.level is ComplianceLevel.DOES_NOT_APPLY and not (
        response.comments or ""
    ).strip():
        findings.append(
            Finding(
                response.expectation_id,
                Severity.ERROR,
                "DoesNotApply requires an explanation in comments",
            )
        )
    if response.level is ComplianceLevel.ALTERNATE_APPROACH and not (
        response.validation_point or ""
    ).strip():
        findings.append(
            Finding(
                response.expectation_id,
                Severity.ERROR,
                "alternate approach requires a validation point",
            )
        )
    if response.level in (
        ComplianceLevel.YES,
        ComplianceLevel.PARTIAL_LOW,
        ComplianceLevel.PARTIAL_MODERATE,
        ComplianceLevel.PARTIAL_HIGH,
    ) and not (response.validation_point or "").strip():
        findings.append(
            Finding(
                response.expectation_id,
                Severity.WARNING,
                "no validation point recorded for an affirmative answer",
            )
        )
    if not response.control_types:
        findings.append(
            Finding(
                response.expectation_id,
                Severity.WARNING,
                "no HIPAA control types recorded",
            )
        )
    return findings


def validate(assessment: Assessment, catalog: ExpectationCatalog) -> list[Finding]:
    """Full validation report; empty of Errors iff the assessment can be Complete.

    Does not mutate the assessment. Findings are ordered by expectation id,
    Errors before Warnings within one expectation.
    """
    _check_pinned(assessment, catalog)
    scope = set(catalog.in_scope_ids(assessment.include_optional))
    findings: list[Finding] = []
    for eid in sorted(scope):
        response = assessment.responses.get(eid)
        if response is None:
            findings.append(
                Finding(eid, Severity.ERROR, f"missing response for expectation {eid}")
            )
            continue
        findings.extend(response_findings(response))
    for eid in sorted(set(assessment.responses) - scope):
        findings.append(
            Finding(
                eid,
                Severity.ERROR,
                f"response for expectation {eid} is out of the assessment's scope",
            )
        )
    return findings


def blocking_findings(assessment: Assessment, catalog: ExpectationCatalog) -> list[Finding]:
    return [f for f in validate(assessment, catalog) if f.severity is Severity.ERROR]


def _recompute_status(
    assessment: Assessment, catalog: ExpectationCatalog
) -> AssessmentStatus:
    if blocking_findings(assessment, catalog):
        return AssessmentStatus.DRAFT
    return AssessmentStatus.COMPLETE


def set_response(
    assessment: Assessment,
    catalog: ExpectationCatalog,
    response: Response,
    *,
    now: str | None = None,
) -> Assessment:
    """Insert or replace one response; returns a new snapshot.

    Idempotent apart from ``updated_at``. The result's status is recomputed:
    Complete iff every in-scope expectation is answered and no response-level
    Error remains.
    """
    _check_pinned(assessment, catalog)
    scope = catalog.in_scope_ids(assessment.include_optional)
    if response.expectation_id not in scope:
        raise OutOfScopeError(
            f"expectation {response.expectation_id} is not in scope "
            f"({len(scope)} expectations in this assessment)"
        )
    errors = [f for f in response_findings(response) if f.severity is Severity.ERROR]
    if errors:
        raise ValidationError(errors[0].message)
    responses = dict(assessment.responses)
    responses[response.expectation_id] = response
    updated = replace(
        assessment,
        responses=responses,
        updated_at=now or utc_now_iso(),
    )
    return replace(updated, status=_recompute_status(updated, catalog))
