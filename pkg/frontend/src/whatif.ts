// What-if screen: toggle hypothetical upgrades-to-Yes per expectation and
// watch the hypothetical score track the real one side by side; a target
// slider asks the planner for the smallest upgrade set and highlights it.

import { ApiClient, ApiError } from "./api";
import { clear, el } from "./dom";
import {
  UPGRADABLE_LEVELS,
  type CatalogDto,
  type ScoreReportDto,
  type WhatIfDeltaDto,
} from "./types";

function gauge(title: string, kind: string): {
  box: HTMLElement;
  update(report: ScoreReportDto): void;
} {
  const percent = el("strong", { "data-score": kind }, "…");
  const tier = el("span", { class: "gauge-tier" }, "");
  const bar = el("div", { class: "bar" });
  const box = el(
    "div",
    { class: "gauge" },
    el("h4", {}, title),
    percent,
    tier,
    el("div", { class: "bar-track" }, bar),
  );
  return {
    box,
    update(report: ScoreReportDto): void {
      percent.textContent = `${report.overall.percent}%`;
      tier.textContent = report.risk_tier;
      bar.style.width = `${report.overall.percent}%`;
    },
  };
}

export async function renderWhatIf(opts: {
  root: HTMLElement;
  client: ApiClient;
  catalog: CatalogDto;
  assessmentId: string;
}): Promise<void> {
  const { root, client, catalog, assessmentId } = opts;
  clear(root);
  root.append(el("h2", {}, "What-if explorer"));

  let actual: ScoreReportDto;
  try {
    actual = await client.getScore(assessmentId);
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      root.append(
        el("p", {}, "Complete the questionnaire before exploring upgrades."),
      );
      return;
    }
    throw error;
  }

  const actualGauge = gauge("Actual", "actual-percent");
  const hypotheticalGauge = gauge("Hypothetical", "hypothetical-percent");
  actualGauge.update(actual);
  hypotheticalGauge.update(actual);
  const errorLine = el("p", { class: "error-line", role: "alert" }, "");
  root.append(
    el("div", { class: "gauge-pair" }, actualGauge.box, hypotheticalGauge.box),
    errorLine,
  );

  const texts = new Map(catalog.expectations.map((e) => [e.id, e.text]));
  const toggles = new Map<number, HTMLInputElement>();
  const rowsByExpectation = new Map<number, HTMLElement>();

  function selectedDeltas(): WhatIfDeltaDto[] {
    return [...toggles.entries()]
      .filter(([, box]) => box.checked)
      .map(([expectationId]) => ({
        expectation_id: expectationId,
        proposed_level: "Yes",
      }));
  }

  async function refreshHypothetical(): Promise<void> {
    errorLine.textContent = "";
    try {
      hypotheticalGauge.update(
        await client.whatIf(assessmentId, selectedDeltas()),
      );
    } catch (error) {
      if (error instanceof ApiError) {
        errorLine.textContent = `${error.code}: ${error.message}`;
        return;
      }
      throw error;
    }
  }

  const list = el("div", { class: "whatif-list" });
  for (const entry of actual.per_expectation) {
    const upgradable = UPGRADABLE_LEVELS.has(entry.level);
    const box = el("input", {
      type: "checkbox",
      disabled: !upgradable,
      "aria-label": `Upgrade expectation ${entry.expectation_id} to Yes`,
    }) as HTMLInputElement;
    box.addEventListener("change", () => void refreshHypothetical());
    toggles.set(entry.expectation_id, box);
    const row = el(
      "label",
      { class: "whatif-row", "data-expectation": String(entry.expectation_id) },
      box,
      el("span", { class: "row-id" }, String(entry.expectation_id)),
      ` ${texts.get(entry.expectation_id) ?? ""}: ${entry.level} (`,
      el("span", { "data-score": "whatif-value" }, entry.value),
      ")",
    );
    rowsByExpectation.set(entry.expectation_id, row);
    list.append(row);
  }
  root.append(list);

  const slider = el("input", {
    type: "range",
    min: "0",
    max: "100",
    step: "1",
    value: "80",
    "aria-label": "Remediation target percent",
  }) as HTMLInputElement;
  const sliderValue = el("span", { class: "slider-value" }, "80%");
  const planLine = el("p", { class: "plan-line" }, "");
  root.append(
    el(
      "div",
      { class: "plan-panel" },
      el("h3", {}, "Remediation target"),
      slider,
      sliderValue,
      planLine,
    ),
  );

  // Build the exact decimal target from the slider text itself: 80 -> "0.8".
  function sliderTarget(): string {
    const raw = slider.value;
    if (raw === "100") {
      return "1";
    }
    return `0.${raw.padStart(2, "0")}`.replace(/0+$/, "").replace(/\.$/, "") || "0";
  }

  async function refreshPlan(): Promise<void> {
    sliderValue.textContent = `${slider.value}%`;
    for (const row of rowsByExpectation.values()) {
      row.classList.remove("planned");
    }
    const plan = await client.planRemediation(assessmentId, sliderTarget());
    for (const delta of plan.deltas) {
      rowsByExpectation.get(delta.expectation_id)?.classList.add("planned");
    }
    planLine.textContent = plan.feasible
      ? `Plan: ${plan.deltas.length} upgrade(s) reach `
      : `Target unreachable; best achievable is `;
    planLine.append(
      el("span", { "data-score": "plan-percent" }, `${plan.projected_percent}%`),
    );
  }
  slider.addEventListener("change", () => void refreshPlan());
  await refreshPlan();
}
