"""Compliance-to-value mapping, aggregation, and risk tiering.

Each categorical answer maps to a fixed value (quarters of 1); values are
summed per sub-goal, per goal, and overall, and the overall fraction is
classified into one of three risk tiers. All arithmetic is exact rational
arithmetic (binary floating point never touches a score), so identical
inputs always produce byte-identical canonical reports.

Does-Not-Apply handling is configurable: the strict mode keeps such answers
in the denominator at value 0 (the workbook's literal arithmetic), while the
exclude mode removes them from both numerator and denominator. The mode used
is recorded in every report.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .assessment import Assessment, ComplianceLevel, Severity, validate
from .canonical import (
    canonical_bytes,
    fraction_from_ratio,
    fraction_to_decimal,
    fraction_to_percent,
    parse_fraction,
    ratio_dict,
)
from .catalog import ExpectationCatalog
from .errors import (
    CatalogMismatchError,
    DomainError,
    IncompleteAssessmentError,
    ParseError,
)

# The fixed answer-to-value table. Total over all eight levels.
VALUE_MAP = {
    ComplianceLevel.YES: Fraction(1),
    ComplianceLevel.NO: Fraction(0),
    ComplianceLevel.PARTIAL_LOW: Fraction(1, 4),
    ComplianceLevel.PARTIAL_MODERATE: Fraction(1, 2),
    ComplianceLevel.PARTIAL_HIGH: Fraction(3, 4),
    ComplianceLevel.DOES_NOT_APPLY: Fraction(0),
    ComplianceLevel.ALTERNATE_APPROACH: Fraction(1),
    ComplianceLevel.UNKNOWN: Fraction(0),
}


def score_value(level: ComplianceLevel) -> Fraction:
    """The fixed numeric value of one categorical answer."""
    return VALUE_MAP[level]


class NaMode(str, Enum):
    STRICT_PAPER = "StrictPaper"
    EXCLUDE_FROM_DENOMINATOR = "ExcludeFromDenominator"


class RiskTier(str, Enum):
    ACCEPTABLE = "Acceptable"
    CORRECTABLE = "Correctable"
    UNACCEPTABLE = "Unacceptable"


class Mitigation(str, Enum):
    REDUCE = "REDUCE"
    AVOID = "AVOID"
    ACCEPT = "ACCEPT"
    TRANSFER = "TRANSFER"


# Advisory orderings per tier; membership is the contract, order is display.
_MITIGATIONS = {
    RiskTier.ACCEPTABLE: (Mitigation.ACCEPT,),
    RiskTier.CORRECTABLE: (Mitigation.REDUCE, Mitigation.TRANSFER, Mitigation.ACCEPT),
    RiskTier.UNACCEPTABLE: (Mitigation.REDUCE, Mitigation.AVOID, Mitigation.TRANSFER),
}


def mitigation_options(tier: RiskTier) -> tuple[Mitigation, ...]:
    """Advisory risk-handling strategies for a tier, strongest first."""
    return _MITIGATIONS[tier]


@dataclass(frozen=True)
class ScoringConfig:
    na_mode: NaMode = NaMode.STRICT_PAPER
    acceptable_threshold: Fraction = Fraction(4, 5)
    correctable_floor: Fraction = Fraction(1, 2)
    include_optional_in_aggregate: bool = False

    def __post_init__(self):
        for name in ("acceptable_threshold", "correctable_floor"):
            value = getattr(self, name)
            if not isinstance(value, Fraction):
                raise DomainError(f"{name} must be an exact Fraction")
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if self.correctable_floor > self.acceptable_threshold:
            raise DomainError(
                "correctable_floor must not exceed acceptable_threshold"
            )

    def to_dict(self) -> dict:
        return {
            "na_mode": self.na_mode.value,
            "acceptable_threshold": fraction_to_decimal(self.acceptable_threshold),
            "correctable_floor": fraction_to_decimal(self.correctable_floor),
            "include_optional_in_aggregate": self.include_optional_in_aggregate,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ScoringConfig":
        try:
            return cls(
                na_mode=NaMode(raw["na_mode"]),
                acceptable_threshold=parse_fraction(raw["acceptable_threshold"]),
                correctable_floor=parse_fraction(raw["correctable_floor"]),
                include_optional_in_aggregate=bool(
                    raw["include_optional_in_aggregate"]
                ),
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed scoring config: {exc}") from exc


def classify_risk(fraction: Fraction, config: ScoringConfig = ScoringConfig()) -> RiskTier:
    """Tier for an overall fraction; boundary values belong to the higher tier."""
    fraction = parse_fraction(fraction)
    if not 0 <= fraction <= 1:
        raise DomainError(f"fraction must lie in [0, 1], got {fraction}")
    if fraction >= config.acceptable_threshold:
        return RiskTier.ACCEPTABLE
    if fraction >= config.correctable_floor:
        return RiskTier.CORRECTABLE
    return RiskTier.UNACCEPTABLE


@dataclass(frozen=True)
class Aggregate:
    sum: Fraction
    applicable_count: int

    @property
    def fraction(self) -> Fraction:
        # No applicable items means nothing applicable is failing.
        if self.applicable_count == 0:
            return Fraction(1)
        return self.sum / self.applicable_count

    def to_dict(self) -> dict:
        return {
            "sum": fraction_to_decimal(self.sum),
            "applicable_count": self.applicable_count,
            "fraction": fraction_to_decimal(self.fraction),
            "ratio": ratio_dict(self.fraction),
            "percent": fraction_to_percent(self.fraction),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Aggregate":
        agg = cls(
            sum=parse_fraction(raw["sum"]),
            applicable_count=int(raw["applicable_count"]),
        )
        if agg.fraction != fraction_from_ratio(raw["ratio"]):
            raise ParseError("aggregate ratio does not match sum/applicable_count")
        return agg


@dataclass(frozen=True)
class PerExpectationScore:
    expectation_id: int
    level: ComplianceLevel
    value: Fraction

    def to_dict(self) -> dict:
        return {
            "expectation_id": self.expectation_id,
            "level": self.level.value,
            "value": fraction_to_decimal(self.value),
        }


@dataclass(frozen=True)
class ScoreReport:
    assessment_id: str
    catalog_version: str
    catalog_checksum: str
    config: ScoringConfig
    per_expectation: tuple[PerExpectationScore, ...]
    subgoal_scores: dict[str, Aggregate]
    goal_scores: dict[str, Aggregate]
    overall: Aggregate
    optional_scores: Aggregate | None
    risk_tier: RiskTier
    deficiencies: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "assessment_id": self.assessment_id,
            "catalog_version": self.catalog_version,
            "catalog_checksum": self.catalog_checksum,
            "config": self.config.to_dict(),
            "per_expectation": [p.to_dict() for p in self.per_expectation],
            "subgoal_scores": {k: v.to_dict() for k, v in self.subgoal_scores.items()},
            "goal_scores": {k: v.to_dict() for k, v in self.goal_scores.items()},
            "overall": self.overall.to_dict(),
            "optional_scores": (
                None if self.optional_scores is None else self.optional_scores.to_dict()
            ),
            "risk_tier": self.risk_tier.value,
            # Derived from risk_tier; carried so report consumers need no
            # tier-to-strategy knowledge of their own.
            "mitigations": [m.value for m in mitigation_options(self.risk_tier)],
            "deficiencies": list(self.deficiencies),
        }

    def canonical_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())

    @classmethod
    def from_dict(cls, raw: dict) -> "ScoreReport":
        try:
            per = tuple(
                PerExpectationScore(
                    expectation_id=int(p["expectation_id"]),
                    level=ComplianceLevel(p["level"]),
                    value=parse_fraction(p["value"]),
                )
                for p in raw["per_expectation"]
            )
            return cls(
                assessment_id=raw["assessment_id"],
                catalog_version=raw["catalog_version"],
                catalog_checksum=raw["catalog_checksum"],
                config=ScoringConfig.from_dict(raw["config"]),
                per_expectation=per,
                subgoal_scores={
                    k: Aggregate.from_dict(v) for k, v in raw["subgoal_scores"].items()
                },
                goal_scores={
                    k: Aggregate.from_dict(v) for k, v in raw["goal_scores"].items()
                },
                overall=Aggregate.from_dict(raw["overall"]),
                optional_scores=(
                    None
                    if raw["optional_scores"] is None
                    else Aggregate.from_dict(raw["optional_scores"])
                ),
                risk_tier=RiskTier(raw["risk_tier"]),
                deficiencies=tuple(int(i) for i in raw["deficiencies"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed score report: {exc}") from exc


# Quarter-unit view of the value table: summing integers then dividing once
# keeps aggregation exact and cheap.
_QUARTERS = {level: int(value * 4) for level, value in VALUE_MAP.items()}


def _aggregate(levels: list[ComplianceLevel], na_mode: NaMode) -> Aggregate:
    quarters = 0
    count = 0
    exclude_na = na_mode is NaMode.EXCLUDE_FROM_DENOMINATOR
    for level in levels:
        if exclude_na and level is ComplianceLevel.DOES_NOT_APPLY:
            continue
        quarters += _QUARTERS[level]
        count += 1
    return Aggregate(sum=Fraction(quarters, 4), applicable_count=count)


def score_assessment(
    assessment: Assessment,
    catalog: ExpectationCatalog,
    config: ScoringConfig = ScoringConfig(),
) -> ScoreReport:
    """Score a complete assessment against its pinned catalog.

    The aggregate scope is the core expectations, plus the optional items
    when the config opts them in and the assessment answered them; optional
    items are otherwise reported only in their separate block.
    """
    if assessment.catalog_checksum != catalog.checksum:
        raise CatalogMismatchError(
            f"assessment is pinned to catalog {assessment.catalog_checksum[:12]}..., "
            f"got {catalog.checksum[:12]}..."
        )
    findings = validate(assessment, catalog)
    blocking = [f for f in findings if f.severity is Severity.ERROR]
    if blocking:
        raise IncompleteAssessmentError(
            f"assessment has {len(blocking)} blocking finding(s)", findings
        )

    scope = catalog.in_scope_ids(assessment.include_optional)
    per = tuple(
        PerExpectationScore(eid, assessment.responses[eid].level,
                            score_value(assessment.responses[eid].level))
        for eid in scope
    )
    by_id = {p.expectation_id: p for p in per}

    optional_ids = {e.id for e in catalog.optional_expectations()}
    aggregate_ids = [
        eid
        for eid in scope
        if eid not in optional_ids or config.include_optional_in_aggregate
    ]

    def agg_for(ids) -> Aggregate:
        return _aggregate([by_id[i].level for i in ids], config.na_mode)

    subgoal_scores: dict[str, Aggregate] = {}
    goal_scores: dict[str, Aggregate] = {}
    subgoal_members: dict[str, list[int]] = {}
    goal_members: dict[str, list[int]] = {}
    for eid in aggregate_ids:
        exp = catalog.expectation_by_id(eid)
        subgoal_members.setdefault(exp.sub_goal, []).append(eid)
        goal_members.setdefault(exp.goal.value, []).append(eid)
    for sub_goal, ids in subgoal_members.items():
        subgoal_scores[sub_goal] = agg_for(ids)
    for goal, ids in goal_members.items():
        goal_scores[goal] = agg_for(ids)

    overall = agg_for(aggregate_ids)
    optional_in_scope = [eid for eid in scope if eid in optional_ids]
    optional_scores = agg_for(optional_in_scope) if optional_in_scope else None

    deficiencies = tuple(
        p.expectation_id
        for p in sorted(per, key=lambda p: (p.value, p.expectation_id))
        if p.value < 1
    )

    return ScoreReport(
        assessment_id=assessment.id,
        catalog_version=catalog.version,
        catalog_checksum=catalog.checksum,
        config=config,
        per_expectation=per,
        subgoal_scores=subgoal_scores,
        goal_scores=goal_scores,
        overall=overall,
        optional_scores=optional_scores,
        risk_tier=classify_risk(overall.fraction, config),
        deficiencies=deficiencies,
    )
