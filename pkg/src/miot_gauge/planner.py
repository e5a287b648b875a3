"""What-if evaluation and remediation planning.

``what_if`` scores a hypothetical copy of an assessment with some answers
upgraded; ``plan_remediation`` finds the smallest set of upgrades-to-Yes that
reaches a target overall fraction.

Upgrades are independent and additive over a fixed denominator (the planner
never touches Does-Not-Apply answers, so applicability cannot shift), which
makes the largest-gains prefix optimal at every cardinality. The randomized
test suite still cross-checks plan cardinality against exhaustive subset
enumeration rather than trusting that argument.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .assessment import Assessment, ComplianceLevel
from .canonical import (
    canonical_bytes,
    fraction_to_decimal,
    fraction_to_percent,
    parse_fraction,
    ratio_dict,
)
from .catalog import ExpectationCatalog
from .errors import DomainError, DowngradeRejectedError, OutOfScopeError
from .scoring import ScoreReport, ScoringConfig, score_assessment, score_value


@dataclass(frozen=True)
class WhatIfDelta:
    expectation_id: int
    proposed_level: ComplianceLevel

    def to_dict(self) -> dict:
        return {
            "expectation_id": self.expectation_id,
            "proposed_level": self.proposed_level.value,
        }


@dataclass(frozen=True)
class RemediationPlan:
    target_fraction: Fraction
    deltas: tuple[WhatIfDelta, ...]
    projected_fraction: Fraction
    feasible: bool

    def to_dict(self) -> dict:
        return {
            "target_fraction": fraction_to_decimal(self.target_fraction),
            "deltas": [d.to_dict() for d in self.deltas],
            "projected_fraction": fraction_to_decimal(self.projected_fraction),
            "projected_ratio": ratio_dict(self.projected_fraction),
            "projected_percent": fraction_to_percent(self.projected_fraction),
            "feasible": self.feasible,
        }

    def canonical_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())


def _apply_deltas(
    assessment: Assessment,
    catalog: ExpectationCatalog,
    deltas,
) -> Assessment:
    scope = set(catalog.in_scope_ids(assessment.include_optional))
    responses = dict(assessment.responses)
    for delta in deltas:
        if delta.expectation_id not in scope:
            raise OutOfScopeError(
                f"expectation {delta.expectation_id} is not in scope"
            )
        current = responses.get(delta.expectation_id)
        if current is None:
            raise OutOfScopeError(
                f"expectation {delta.expectation_id} has no response to upgrade"
            )
        if score_value(delta.proposed_level) < score_value(current.level):
            raise DowngradeRejectedError(
                f"delta for expectation {delta.expectation_id} lowers the mapped "
                f"value ({current.level.value} -> {delta.proposed_level.value})"
            )
        responses[delta.expectation_id] = replace(current, level=delta.proposed_level)
    return replace(assessment, responses=responses)


def what_if(
    assessment: Assessment,
    catalog: ExpectationCatalog,
    config: ScoringConfig = ScoringConfig(),
    deltas=(),
) -> ScoreReport:
    """Score a hypothetical assessment with ``deltas`` applied.

    The stored assessment is untouched; an empty delta list reproduces
    ``score_assessment`` byte for byte.
    """
    return score_assessment(_apply_deltas(assessment, catalog, deltas), catalog, config)


def plan_remediation(
    assessment: Assessment,
    catalog: ExpectationCatalog,
    config: ScoringConfig = ScoringConfig(),
    target_fraction=Fraction(4, 5),
) -> RemediationPlan:
    """Smallest set of upgrades-to-Yes reaching ``target_fraction``.

    Candidates are answered, in-aggregate expectations whose value is below 1,
    excluding Does-Not-Apply (changing applicability is a human scoping
    judgment). Ties among minimal plans prefer lower-valued current answers,
    then lower expectation ids. When even upgrading everything misses the
    target the plan carries every candidate, the best achievable fraction,
    and ``feasible=False``.
    """
    target = parse_fraction(target_fraction)
    if not 0 <= target <= 1:
        raise DomainError(f"target fraction must lie in [0, 1], got {target}")

    base = score_assessment(assessment, catalog, config)
    if base.overall.fraction >= target:
        return RemediationPlan(
            target_fraction=target,
            deltas=(),
            projected_fraction=base.overall.fraction,
            feasible=True,
        )

    optional_ids = {e.id for e in catalog.optional_expectations()}
    candidates = [
        p
        for p in base.per_expectation
        if p.value < 1
        and p.level is not ComplianceLevel.DOES_NOT_APPLY
        and (p.expectation_id not in optional_ids or config.include_optional_in_aggregate)
    ]
    candidates.sort(key=lambda p: (p.value, p.expectation_id))

    denominator = base.overall.applicable_count
    achieved = base.overall.sum
    chosen: list[WhatIfDelta] = []
    feasible = False
    for candidate in candidates:
        if denominator and achieved / denominator >= target:
            feasible = True
            break
        achieved += 1 - candidate.value
        chosen.append(WhatIfDelta(candidate.expectation_id, ComplianceLevel.YES))
    else:
        feasible = bool(denominator) and achieved / denominator >= target

    projected = what_if(assessment, catalog, config, chosen)
    return RemediationPlan(
        target_fraction=target,
        deltas=tuple(chosen),
        projected_fraction=projected.overall.fraction,
        feasible=feasible,
    )
