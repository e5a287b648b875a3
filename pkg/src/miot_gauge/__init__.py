"""Auditable NISTIR 8228 expectation scoring for medical IoT devices."""

from .assessment import (
    Assessment,
    AssessmentStatus,
    ComplianceLevel,
    ControlType,
    DeviceMeta,
    Finding,
    Response,
    Severity,
    new_assessment,
    set_response,
    validate,
)
from .catalog import (
    Expectation,
    ExpectationCatalog,
    Goal,
    Source,
    SubGoal,
    default_catalog,
    load_catalog,
)
from .planner import RemediationPlan, WhatIfDelta, plan_remediation, what_if
from .report import (
    RadarMode,
    RadarSpec,
    radar_spec_from_report,
    render_csv,
    render_diff,
    render_radar,
    render_table,
)
from .scoring import (
    Mitigation,
    NaMode,
    RiskTier,
    ScoreReport,
    ScoringConfig,
    classify_risk,
    mitigation_options,
    score_assessment,
    score_value,
)
from .store import EventKind, HistoryEvent, Store

__version__ = "0.1.0"

__all__ = [
    "Assessment",
    "AssessmentStatus",
    "ComplianceLevel",
    "ControlType",
    "DeviceMeta",
    "EventKind",
    "Expectation",
    "ExpectationCatalog",
    "Finding",
    "Goal",
    "HistoryEvent",
    "Mitigation",
    "NaMode",
    "RadarMode",
    "RadarSpec",
    "RemediationPlan",
    "Response",
    "RiskTier",
    "ScoreReport",
    "ScoringConfig",
    "Severity",
    "Source",
    "Store",
    "SubGoal",
    "WhatIfDelta",
    "classify_risk",
    "default_catalog",
    "load_catalog",
    "mitigation_options",
    "new_assessment",
    "plan_remediation",
    "radar_spec_from_report",
    "render_csv",
    "render_diff",
    "render_radar",
    "render_table",
    "score_assessment",
    "score_value",
    "set_response",
    "validate",
    "what_if",
]
