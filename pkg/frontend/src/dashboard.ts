// Dashboard screen: risk-tier banner, overall gauge, sub-goal table,
// deficiency list, and the API-rendered radar. Every score string on screen
// is copied verbatim from an API response (elements carry data-score);
// progress-bar widths reuse the API's percent strings.

import { ApiClient, ApiError } from "./api";
import { clear, el } from "./dom";
import {
  goalTitle,
  type AggregateDto,
  type CatalogDto,
  type ScoreReportDto,
} from "./types";

function summaryRow(
  label: string,
  agg: AggregateDto,
  kind: string,
): HTMLElement {
  const bar = el("div", { class: "bar" });
  bar.style.width = `${agg.percent}%`;
  return el(
    "div",
    { class: "summary-row" },
    el("span", { class: "summary-label" }, label),
    el("span", { class: "summary-ratio" }, `${agg.sum}/${agg.applicable_count}`),
    el("span", { class: "summary-percent", "data-score": kind }, `${agg.percent}%`),
    el("div", { class: "bar-track" }, bar),
  );
}

export async function renderDashboard(opts: {
  root: HTMLElement;
  client: ApiClient;
  catalog: CatalogDto;
  assessmentId: string;
}): Promise<void> {
  const { root, client, catalog, assessmentId } = opts;
  clear(root);
  root.append(el("h2", {}, "Dashboard"));

  let report: ScoreReportDto;
  try {
    report = await client.getScore(assessmentId);
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      root.append(
        el("p", { class: "findings-intro" },
           "The assessment is not complete yet. Outstanding findings:"),
        el(
          "ul",
          { class: "findings-checklist" },
          ...error.findings.map((finding) =>
            el(
              "li",
              { class: `finding-${finding.severity.toLowerCase()}` },
              finding.expectation_id === null
                ? finding.message
                : `#${finding.expectation_id}: ${finding.message}`,
            ),
          ),
        ),
      );
      return;
    }
    throw error;
  }

  const banner = el(
    "div",
    { class: `tier-banner tier-${report.risk_tier.toLowerCase()}` },
    el("strong", { "data-score": "risk-tier" }, report.risk_tier),
    el("span", { "data-score": "overall-percent" }, `${report.overall.percent}%`),
    el(
      "span",
      { class: "mitigations" },
      `options: ${report.mitigations.join(", ")}`,
    ),
  );
  root.append(banner);

  const ringToggle = el("input", { type: "checkbox", checked: true });
  const radarBox = el("div", { class: "radar-box" });
  async function refreshRadar(): Promise<void> {
    const params: Record<string, string> = { mode: "per-subgoal" };
    if ((ringToggle as HTMLInputElement).checked) {
      params.threshold_ring = report.config.acceptable_threshold;
    }
    radarBox.innerHTML = await client.getRadarSvg(assessmentId, params);
  }
  ringToggle.addEventListener("change", () => void refreshRadar());
  root.append(
    el(
      "div",
      { class: "radar-panel" },
      radarBox,
      el("label", { class: "ring-toggle" }, ringToggle, " show acceptance threshold ring"),
    ),
  );
  await refreshRadar();

  const summaries = el("div", { class: "summaries" });
  const subGoalTitles = new Map(catalog.sub_goals.map((sg) => [sg.id, sg.title]));
  const firstSeen = new Map<string, number>();
  for (const exp of [...catalog.expectations].sort((a, b) => a.id - b.id)) {
    if (!firstSeen.has(exp.sub_goal)) {
      firstSeen.set(exp.sub_goal, exp.id);
    }
  }
  const orderedSubGoals = Object.keys(report.subgoal_scores).sort(
    (a, b) => (firstSeen.get(a) ?? 0) - (firstSeen.get(b) ?? 0),
  );
  for (const subGoal of orderedSubGoals) {
    summaries.append(
      summaryRow(
        subGoalTitles.get(subGoal) ?? subGoal,
        report.subgoal_scores[subGoal],
        "subgoal-percent",
      ),
    );
  }
  for (const goal of Object.keys(report.goal_scores)) {
    summaries.append(
      summaryRow(goalTitle(goal), report.goal_scores[goal], "goal-percent"),
    );
  }
  summaries.append(summaryRow("Overall", report.overall, "overall-percent"));
  if (report.optional_scores) {
    summaries.append(
      summaryRow("Optional (IR8259 series)", report.optional_scores, "optional-percent"),
    );
  }
  root.append(summaries);

  const values = new Map(
    report.per_expectation.map((p) => [p.expectation_id, p]),
  );
  const texts = new Map(catalog.expectations.map((e) => [e.id, e.text]));
  root.append(el("h3", {}, "Deficiencies (worst first)"));
  if (report.deficiencies.length === 0) {
    root.append(el("p", { class: "no-deficiencies" }, "none"));
  } else {
    root.append(
      el(
        "ol",
        { class: "deficiency-list" },
        ...report.deficiencies.map((eid) => {
          const entry = values.get(eid);
          return el(
            "li",
            {},
            el("span", { class: "row-id" }, String(eid)),
            ` ${texts.get(eid) ?? ""}: ${entry?.level ?? "?"} `,
            el("span", { "data-score": "deficiency-value" }, entry?.value ?? "?"),
          );
        }),
      ),
    );
  }
}
