// Wire-format DTOs, mirroring the /api/v1 documents field for field.
// Scores travel as exact decimal strings; the UI renders them verbatim and
// never does arithmetic of its own.

export interface SubGoalDto {
  id: string;
  goal: string;
  title: string;
}

export interface ExpectationDto {
  id: number;
  text: string;
  goal: string;
  sub_goal: string;
  csf_refs: string[];
  control_refs: string[];
  source: string;
  implications: string | null;
}

export interface CatalogDto {
  version: string;
  checksum: string;
  sub_goals: SubGoalDto[];
  expectations: ExpectationDto[];
}

export interface ResponseDto {
  expectation_id: number;
  level: string;
  validation_point: string;
  validation_tool: string | null;
  control_types: string[];
  comments: string | null;
}

export interface DeviceMetaDto {
  organization: string;
  device_name: string;
  manufacturer: string;
  model: string;
  firmware_version: string | null;
  sbom_ref: string | null;
  notes: string | null;
}

export interface AssessmentDto {
  id: string;
  device: DeviceMetaDto;
  catalog_version: string;
  catalog_checksum: string;
  include_optional: boolean;
  created_at: string;
  updated_at: string;
  status: "Draft" | "Complete";
  responses: Record<string, ResponseDto>;
}

export interface RatioDto {
  numerator: number;
  denominator: number;
}

export interface AggregateDto {
  sum: string;
  applicable_count: number;
  fraction: string;
  ratio: RatioDto;
  percent: string;
}

export interface PerExpectationDto {
  expectation_id: number;
  level: string;
  value: string;
}

export interface ScoringConfigDto {
  na_mode: string;
  acceptable_threshold: string;
  correctable_floor: string;
  include_optional_in_aggregate: boolean;
}

export interface ScoreReportDto {
  assessment_id: string;
  catalog_version: string;
  catalog_checksum: string;
  config: ScoringConfigDto;
  per_expectation: PerExpectationDto[];
  subgoal_scores: Record<string, AggregateDto>;
  goal_scores: Record<string, AggregateDto>;
  overall: AggregateDto;
  optional_scores: AggregateDto | null;
  risk_tier: string;
  mitigations: string[];
  deficiencies: number[];
}

export interface FindingDto {
  expectation_id: number | null;
  severity: "Error" | "Warning";
  message: string;
}

export interface WhatIfDeltaDto {
  expectation_id: number;
  proposed_level: string;
}

export interface RemediationPlanDto {
  target_fraction: string;
  deltas: WhatIfDeltaDto[];
  projected_fraction: string;
  projected_ratio: RatioDto;
  projected_percent: string;
  feasible: boolean;
}

export interface HistoryEventDto {
  sequence: number;
  timestamp: string;
  kind: string;
  payload: unknown;
}

// The workbook's compliance key: answer, fixed value shown inline.
export const COMPLIANCE_LEVELS: ReadonlyArray<{ value: string; label: string }> = [
  { value: "Yes", label: "Yes (1)" },
  { value: "No", label: "No (0)" },
  { value: "PartialLow", label: "Partial-Low (0.25)" },
  { value: "PartialModerate", label: "Partial-Moderate (0.50)" },
  { value: "PartialHigh", label: "Partial-High (0.75)" },
  { value: "DoesNotApply", label: "Does Not Apply (0)" },
  { value: "AlternateApproach", label: "Alternate Approach (1)" },
  { value: "Unknown", label: "Unknown (0)" },
];

export const CONTROL_TYPES = ["Administrative", "Technical", "Physical"] as const;

// Levels a what-if toggle may upgrade from (everything below full credit
// except Does-Not-Apply, whose applicability is a human scoping call).
export const UPGRADABLE_LEVELS = new Set([
  "No",
  "PartialLow",
  "PartialModerate",
  "PartialHigh",
  "Unknown",
]);

export function goalTitle(goal: string): string {
  switch (goal) {
    case "DeviceSecurity":
      return "Protect Device Security";
    case "DataSecurity":
      return "Protect Data Security";
    case "IndividualPrivacy":
      return "Protect Individuals' Privacy";
    default:
      return goal;
  }
}
