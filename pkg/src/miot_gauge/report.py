"""Rendering: aligned text tables, CSV export, radar SVG, score diffs.

All renderers are pure functions of their inputs: number formatting is fixed
(percentages with exactly two decimals, half-up, display only; the exact
rationals live underneath), coordinates are emitted with two decimals, and
identical inputs yield byte-identical output. The radar SVG optionally embeds
a metadata comment; callers that need golden-file stability simply omit the
timestamp from that metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .canonical import canonical_line, fraction_to_decimal, fraction_to_percent
from .catalog import GOAL_TITLES, ExpectationCatalog, Goal
from .errors import CatalogMismatchError, TooFewAxesError
from .scoring import Aggregate, ScoreReport, mitigation_options

_TEXT_WIDTH = 60


def _check_catalog(report: ScoreReport, catalog: ExpectationCatalog) -> None:
    if report.catalog_checksum != catalog.checksum:
        raise CatalogMismatchError(
            f"report is pinned to catalog {report.catalog_checksum[:12]}..., "
            f"got {catalog.checksum[:12]}..."
        )


def _truncate(text: str, width: int = _TEXT_WIDTH) -> str:
    if len(text) <= width:
        return text
    return text[: width - 3] + "..."


def _summary(label: str, agg: Aggregate, width: int = 42) -> str:
    ratio = f"{fraction_to_decimal(agg.sum)}/{agg.applicable_count}"
    return f"{label:<{width}} {ratio:>9} = {fraction_to_percent(agg.fraction)}%"


def render_table(report: ScoreReport, catalog: ExpectationCatalog) -> str:
    """Aligned text table: one row per expectation plus summary rows."""
    _check_catalog(report, catalog)
    lines = [
        f"Assessment {report.assessment_id}",
        f"Catalog {report.catalog_version} ({report.catalog_checksum[:12]})  "
        f"na_mode={report.config.na_mode.value}  "
        f"threshold={fraction_to_decimal(report.config.acceptable_threshold)}  "
        f"floor={fraction_to_decimal(report.config.correctable_floor)}",
        "",
        f"{'ID':>3}  {'LEVEL':<18} {'VALUE':<5} {'SUB-GOAL':<38} EXPECTATION",
    ]
    for p in report.per_expectation:
        exp = catalog.expectation_by_id(p.expectation_id)
        sub_goal = catalog.sub_goal_by_id(exp.sub_goal)
        lines.append(
            f"{p.expectation_id:>3}  {p.level.value:<18} "
            f"{fraction_to_decimal(p.value):<5} {sub_goal.title:<38} "
            f"{_truncate(exp.text)}"
        )

    lines.append("")
    shown = {p.expectation_id for p in report.per_expectation}
    for sub_goal in catalog.ordered_sub_goals(shown):
        agg = report.subgoal_scores.get(sub_goal.id)
        if agg is not None:
            lines.append(_summary(sub_goal.title, agg))
    for goal in Goal:
        agg = report.goal_scores.get(goal.value)
        if agg is not None:
            lines.append(_summary(GOAL_TITLES[goal], agg))
    lines.append(_summary("OVERALL", report.overall))
    if report.optional_scores is not None:
        lines.append(_summary("OPTIONAL (IR8259 series)", report.optional_scores))

    options = ", ".join(m.value for m in mitigation_options(report.risk_tier))
    lines.append("")
    lines.append(f"Risk tier: {report.risk_tier.value}  (options: {options})")
    if report.deficiencies:
        deficient = ", ".join(str(i) for i in report.deficiencies)
        lines.append(f"Deficiencies (worst first): {deficient}")
    else:
        lines.append("Deficiencies (worst first): none")
    return "\n".join(lines) + "\n"


def render_csv(report: ScoreReport, catalog: ExpectationCatalog) -> str:
    """Machine-readable per-expectation export."""
    _check_catalog(report, catalog)
    lines = ["expectation_id,level,value,sub_goal,goal"]
    for p in report.per_expectation:
        exp = catalog.expectation_by_id(p.expectation_id)
        lines.append(
            f"{p.expectation_id},{p.level.value},{fraction_to_decimal(p.value)},"
            f"{exp.sub_goal},{exp.goal.value}"
        )
    return "\n".join(lines) + "\n"


class RadarMode(str, Enum):
    PER_SUB_GOAL = "PerSubGoal"
    PER_GOAL = "PerGoal"
    PER_EXPECTATION = "PerExpectation"


@dataclass(frozen=True)
class RadarSpec:
    axes: tuple[tuple[str, Fraction], ...]
    mode: RadarMode = RadarMode.PER_SUB_GOAL
    size: int = 640
    threshold_ring: Fraction | None = None


def radar_spec_from_report(
    report: ScoreReport,
    catalog: ExpectationCatalog,
    mode: RadarMode = RadarMode.PER_SUB_GOAL,
    threshold_ring: Fraction | None = None,
    size: int = 640,
) -> RadarSpec:
    """Axes for a report, in catalog order."""
    _check_catalog(report, catalog)
    axes: list[tuple[str, Fraction]] = []
    if mode is RadarMode.PER_SUB_GOAL:
        covered = set(report.subgoal_scores)
        for sub_goal in catalog.ordered_sub_goals():
            if sub_goal.id in covered:
                axes.append((sub_goal.title, report.subgoal_scores[sub_goal.id].fraction))
    elif mode is RadarMode.PER_GOAL:
        for goal in Goal:
            agg = report.goal_scores.get(goal.value)
            if agg is not None:
                axes.append((GOAL_TITLES[goal], agg.fraction))
    else:
        optional_ids = {e.id for e in catalog.optional_expectations()}
        for p in report.per_expectation:
            if (
                p.expectation_id in optional_ids
                and not report.config.include_optional_in_aggregate
            ):
                continue
            axes.append((str(p.expectation_id), p.value))
    return RadarSpec(
        axes=tuple(axes), mode=mode, size=size, threshold_ring=threshold_ring
    )


def radar_geometry(spec: RadarSpec) -> tuple[float, float, float]:
    """(cx, cy, R): center and spoke radius, leaving a band for labels."""
    cx = cy = spec.size / 2
    radius = spec.size / 2 - (spec.size * 9) // 80
    return cx, cy, radius


def _vertex(cx: float, cy: float, radius: float, k: int, n: int, fraction) -> tuple[float, float]:
    # Spoke k sits at angle 2*pi*k/n clockwise from vertical.
    angle = 2 * math.pi * k / n
    return (
        cx + float(fraction) * radius * math.sin(angle),
        cy - float(fraction) * radius * math.cos(angle),
    )


def _points(cx, cy, radius, n, fractions) -> str:
    coords = [
        _vertex(cx, cy, radius, k, n, fractions[k]) for k in range(n)
    ]
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)


def render_radar(spec: RadarSpec, metadata: dict | None = None) -> str:
    """Standalone SVG radar chart.

    Spokes at angles 2*pi*k/N from vertical, data polygon vertices at
    fraction*R along each spoke, grid rings every 0.25, optional threshold
    reference polygon, labels just outside the outer ring.
    """
    n = len(spec.axes)
    if n < 3:
        raise TooFewAxesError(f"radar needs at least 3 axes, got {n}")
    cx, cy, radius = radar_geometry(spec)
    size = spec.size
    label_r = radius + 12

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
    ]
    if metadata is not None:
        parts.append(f"<!-- {canonical_line(metadata)} -->")
    parts.append(f'<rect width="{size}" height="{size}" fill="#ffffff"/>')

    for step in (1, 2, 3, 4):
        ring = Fraction(step, 4)
        parts.append(
            f'<polygon class="grid" points="{_points(cx, cy, radius, n, [ring] * n)}" '
            f'fill="none" stroke="#d0d0d0" stroke-width="1"/>'
        )
    for k in range(n):
        x, y = _vertex(cx, cy, radius, k, n, 1)
        parts.append(
            f'<line class="spoke" x1="{cx:.2f}" y1="{cy:.2f}" x2="{x:.2f}" y2="{y:.2f}" '
            f'stroke="#d0d0d0" stroke-width="1"/>'
        )
    if spec.threshold_ring is not None:
        parts.append(
            f'<polygon class="threshold" '
            f'points="{_points(cx, cy, radius, n, [spec.threshold_ring] * n)}" '
            f'fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>'
        )
    fractions = [axis[1] for axis in spec.axes]
    parts.append(
        f'<polygon class="data" points="{_points(cx, cy, radius, n, fractions)}" '
        f'fill="#1f77b4" fill-opacity="0.35" stroke="#1f77b4" stroke-width="2"/>'
    )

    for k, (label, _) in enumerate(spec.axes):
        x, y = _vertex(cx, cy, label_r, k, n, 1)
        s = math.sin(2 * math.pi * k / n)
        anchor = "middle" if abs(s) < 1e-9 else ("start" if s > 0 else "end")
        parts.append(
            f'<text class="axis-label" x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}" '
            f'dominant-baseline="middle" font-family="sans-serif" font-size="13" '
            f'fill="#333333">{_escape(label)}</text>'
        )
    # Ring values along the top spoke.
    for step in (1, 2, 3, 4):
        y = cy - radius * step / 4
        parts.append(
            f'<text class="ring-label" x="{cx + 4:.2f}" y="{y - 3:.2f}" '
            f'font-family="sans-serif" font-size="10" fill="#999999">{25 * step}%</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def render_diff(
    older: ScoreReport, newer: ScoreReport, catalog: ExpectationCatalog
) -> str:
    """Textual diff of two reports pinned to the same catalog."""
    if older.catalog_checksum != newer.catalog_checksum:
        raise CatalogMismatchError(
            "reports are pinned to different catalogs "
            f"({older.catalog_checksum[:12]}... vs {newer.catalog_checksum[:12]}...)"
        )
    _check_catalog(newer, catalog)

    old_by_id = {p.expectation_id: p for p in older.per_expectation}
    new_by_id = {p.expectation_id: p for p in newer.per_expectation}
    changed = []
    for eid in sorted(set(old_by_id) | set(new_by_id)):
        old, new = old_by_id.get(eid), new_by_id.get(eid)
        old_desc = f"{old.level.value} ({fraction_to_decimal(old.value)})" if old else "-"
        new_desc = f"{new.level.value} ({fraction_to_decimal(new.value)})" if new else "-"
        if old_desc != new_desc:
            changed.append(f"{eid:>3}  {old_desc:<26} -> {new_desc}")

    lines = [f"Score diff for assessment {newer.assessment_id}"]
    if changed:
        lines.append("")
        lines.extend(changed)
    else:
        lines.append("no changes")

    delta = newer.overall.fraction - older.overall.fraction
    delta_text = fraction_to_decimal(delta)
    if delta > 0:
        delta_text = "+" + delta_text
    lines.append("")
    lines.append(
        f"Overall: {fraction_to_decimal(older.overall.fraction)} -> "
        f"{fraction_to_decimal(newer.overall.fraction)}  (delta {delta_text})"
    )
    if older.risk_tier is newer.risk_tier:
        lines.append(f"Tier:    {newer.risk_tier.value} (unchanged)")
    else:
        lines.append(f"Tier:    {older.risk_tier.value} -> {newer.risk_tier.value}")
    return "\n".join(lines) + "\n"
