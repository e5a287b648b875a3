// Questionnaire screen: one row per in-scope expectation, grouped by
// sub-goal. Saving a row PUTs the response with the tracked ETag; a 409
// refetches the assessment and offers a retry. Selecting Does-Not-Apply
// disables save until an explanation comment is entered. Per-row value
// badges show the scored value returned by the API (never computed here).

import { ApiClient, ApiError } from "./api";
import { clear, el } from "./dom";
import {
  COMPLIANCE_LEVELS,
  CONTROL_TYPES,
  type AssessmentDto,
  type CatalogDto,
  type ExpectationDto,
  type ResponseDto,
  type ScoreReportDto,
} from "./types";

export interface QuestionnaireHandle {
  setReport(report: ScoreReportDto | null): void;
  dirtyCount(): number;
}

interface RowState {
  expectation: ExpectationDto;
  badge: HTMLElement;
  container: HTMLElement;
  isDirty(): boolean;
}

export function inScopeExpectations(
  catalog: CatalogDto,
  assessment: AssessmentDto,
): ExpectationDto[] {
  return catalog.expectations.filter(
    (exp) => exp.source !== "IR8259Optional" || assessment.include_optional,
  );
}

export function subGoalsInOrder(
  catalog: CatalogDto,
  expectations: ExpectationDto[],
): { id: string; title: string; members: ExpectationDto[] }[] {
  const groups = new Map<string, ExpectationDto[]>();
  for (const exp of [...expectations].sort((a, b) => a.id - b.id)) {
    const members = groups.get(exp.sub_goal) ?? [];
    members.push(exp);
    groups.set(exp.sub_goal, members);
  }
  const titles = new Map(catalog.sub_goals.map((sg) => [sg.id, sg.title]));
  return [...groups.entries()].map(([id, members]) => ({
    id,
    title: titles.get(id) ?? id,
    members,
  }));
}

export function renderQuestionnaire(opts: {
  root: HTMLElement;
  client: ApiClient;
  catalog: CatalogDto;
  assessment: AssessmentDto;
  onAssessmentChanged: (assessment: AssessmentDto) => void;
}): QuestionnaireHandle {
  const { root, client, catalog } = opts;
  let assessment = opts.assessment;
  const rows: RowState[] = [];

  clear(root);
  const statusChip = el(
    "span",
    { class: `status-chip status-${assessment.status.toLowerCase()}`, "data-status": "" },
    assessment.status,
  );
  root.append(
    el(
      "div",
      { class: "screen-header" },
      el("h2", {}, `Questionnaire: ${assessment.device.device_name}`),
      statusChip,
    ),
  );

  const expectations = inScopeExpectations(catalog, assessment);
  for (const group of subGoalsInOrder(catalog, expectations)) {
    const section = el("section", { class: "subgoal-group" });
    section.append(el("h3", {}, group.title));
    for (const exp of group.members) {
      const row = buildRow(exp);
      rows.push(row);
      section.append(row.container);
    }
    root.append(section);
  }

  function applyAssessment(next: AssessmentDto): void {
    assessment = next;
    statusChip.textContent = next.status;
    statusChip.className = `status-chip status-${next.status.toLowerCase()}`;
    opts.onAssessmentChanged(next);
  }

  function buildRow(exp: ExpectationDto): RowState {
    const saved = (): ResponseDto | undefined =>
      assessment.responses[String(exp.id)];

    const levelSelect = el("select", { "aria-label": `Compliance for expectation ${exp.id}` });
    levelSelect.append(el("option", { value: "" }, "choose an answer"));
    for (const option of COMPLIANCE_LEVELS) {
      levelSelect.append(el("option", { value: option.value }, option.label));
    }
    const validationPoint = el("input", {
      type: "text",
      placeholder: "Validation point (auditable proof)",
      "aria-label": `Validation point for expectation ${exp.id}`,
    });
    const validationTool = el("input", {
      type: "text",
      placeholder: "Validation tool (optional)",
      "aria-label": `Validation tool for expectation ${exp.id}`,
    });
    const comments = el("textarea", {
      rows: "1",
      placeholder: "Comments",
      "aria-label": `Comments for expectation ${exp.id}`,
    });
    const controls = CONTROL_TYPES.map((name) => {
      const box = el("input", { type: "checkbox", value: name });
      return { name, box };
    });

    const badge = el("span", { class: "value-badge", "data-score": "per-expectation" }, "-");
    const ruleMessage = el("span", { class: "row-message rule", role: "status" });
    const saveMessage = el("span", { class: "row-message feedback", role: "status" });
    const saveButton = el("button", { type: "button" }, "Save") as HTMLButtonElement;

    function currentBody(): Omit<ResponseDto, "expectation_id"> {
      return {
        level: levelSelect.value,
        validation_point: validationPoint.value,
        validation_tool: validationTool.value || null,
        control_types: controls.filter((c) => c.box.checked).map((c) => c.name),
        comments: comments.value || null,
      };
    }

    function loadSaved(): void {
      const response = saved();
      levelSelect.value = response?.level ?? "";
      validationPoint.value = response?.validation_point ?? "";
      validationTool.value = response?.validation_tool ?? "";
      comments.value = response?.comments ?? "";
      for (const { name, box } of controls) {
        box.checked = response?.control_types.includes(name) ?? false;
      }
    }

    function isDirty(): boolean {
      const response = saved();
      const body = currentBody();
      if (!response) {
        return body.level !== "";
      }
      return (
        body.level !== response.level ||
        body.validation_point !== response.validation_point ||
        (body.validation_tool ?? "") !== (response.validation_tool ?? "") ||
        (body.comments ?? "") !== (response.comments ?? "") ||
        body.control_types.join(",") !== response.control_types.join(",")
      );
    }

    function refreshState(): void {
      const body = currentBody();
      const dirty = isDirty();
      container.classList.toggle("modified", dirty);
      if (dirty) {
        saveMessage.textContent = "";
      }
      const needsComment =
        body.level === "DoesNotApply" && !(body.comments ?? "").trim();
      if (needsComment) {
        ruleMessage.textContent = "Does Not Apply requires an explanation comment.";
        saveButton.disabled = true;
        return;
      }
      ruleMessage.textContent = "";
      saveButton.disabled = !dirty || body.level === "";
    }

    async function save(): Promise<void> {
      const body = currentBody();
      saveButton.disabled = true;
      saveMessage.textContent = "";
      try {
        applyAssessment(await client.putResponse(assessment.id, exp.id, body));
        saveMessage.textContent = "saved";
        refreshState();
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          applyAssessment(await client.getAssessment(assessment.id));
          saveMessage.textContent =
            "Edited elsewhere; the assessment was reloaded. Retry to apply your answer.";
          const retry = el(
            "button",
            { type: "button", class: "retry", onclick: () => void save() },
            "Retry",
          );
          saveMessage.append(" ", retry);
          saveButton.disabled = false;
        } else if (error instanceof ApiError) {
          saveMessage.textContent = error.message;
          saveButton.disabled = false;
        } else {
          throw error;
        }
      }
    }

    const container = el(
      "div",
      { class: "expectation-row", "data-expectation": String(exp.id) },
      el(
        "div",
        { class: "row-title" },
        el("span", { class: "row-id" }, String(exp.id)),
        el("span", { class: "row-text" }, exp.text),
        exp.source === "IR8259Optional"
          ? el("span", { class: "optional-chip" }, "optional")
          : null,
        badge,
      ),
      el(
        "div",
        { class: "row-inputs" },
        levelSelect,
        validationPoint,
        validationTool,
        el(
          "span",
          { class: "control-types" },
          ...controls.flatMap(({ name, box }) => [
            el("label", {}, box, ` ${name}`),
          ]),
        ),
        comments,
        saveButton,
        ruleMessage,
        saveMessage,
      ),
    );

    loadSaved();
    refreshState();
    for (const input of [levelSelect, validationPoint, validationTool, comments]) {
      input.addEventListener("input", refreshState);
      input.addEventListener("change", refreshState);
    }
    for (const { box } of controls) {
      box.addEventListener("change", refreshState);
    }
    saveButton.addEventListener("click", () => void save());

    return { expectation: exp, badge, container, isDirty };
  }

  return {
    setReport(report: ScoreReportDto | null): void {
      const values = new Map(
        (report?.per_expectation ?? []).map((p) => [p.expectation_id, p.value]),
      );
      for (const row of rows) {
        row.badge.textContent = values.get(row.expectation.id) ?? "-";
      }
    },
    dirtyCount(): number {
      return rows.filter((row) => row.isDirty()).length;
    },
  };
}
