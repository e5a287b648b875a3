// Single-page shell: landing screen (create or open an assessment) plus
// hash-routed questionnaire / dashboard / what-if tabs. All scoring truth
// lives on the server; this file only moves documents around.

import { ApiClient, ApiError } from "./api";
import { renderDashboard } from "./dashboard";
import { clear, el } from "./dom";
import { renderQuestionnaire, type QuestionnaireHandle } from "./questionnaire";
import { renderWhatIf } from "./whatif";
import type { AssessmentDto, CatalogDto, ScoreReportDto } from "./types";

const TABS = ["questionnaire", "dashboard", "whatif"] as const;
type Tab = (typeof TABS)[number];

export class App {
  private catalog: CatalogDto | null = null;
  private questionnaire: QuestionnaireHandle | null = null;

  constructor(
    private root: HTMLElement,
    private client: ApiClient = new ApiClient(),
  ) {}

  async start(): Promise<void> {
    this.catalog = await this.client.getCatalog();
    window.addEventListener("hashchange", () => void this.route());
    window.addEventListener("beforeunload", (event) => {
      if (this.questionnaire && this.questionnaire.dirtyCount() > 0) {
        event.preventDefault();
      }
    });
    await this.route();
  }

  // Routing follows the hashchange event alone; assigning location.hash
  // already schedules it, so callers must not also invoke route() directly
  // or the screen renders twice.
  navigate(hash: string): void {
    if (window.location.hash === hash) {
      void this.route();
    } else {
      window.location.hash = hash;
    }
  }

  async route(): Promise<void> {
    this.questionnaire = null;
    const match = /^#\/a\/([^/]+)\/(\w+)$/.exec(window.location.hash);
    if (!match) {
      this.renderLanding();
      return;
    }
    const [, assessmentId, tab] = match;
    if (!TABS.includes(tab as Tab)) {
      this.renderLanding();
      return;
    }
    await this.renderAssessment(assessmentId, tab as Tab);
  }

  private renderLanding(): void {
    clear(this.root);
    const idInput = el("input", {
      type: "text",
      placeholder: "assessment id",
      "aria-label": "Assessment id",
    }) as HTMLInputElement;
    const openButton = el(
      "button",
      {
        type: "button",
        onclick: () => {
          if (idInput.value.trim()) {
            this.navigate(`#/a/${idInput.value.trim()}/questionnaire`);
          }
        },
      },
      "Open",
    );

    const org = el("input", { type: "text", placeholder: "Organization *" }) as HTMLInputElement;
    const device = el("input", { type: "text", placeholder: "Device name *" }) as HTMLInputElement;
    const manufacturer = el("input", { type: "text", placeholder: "Manufacturer" }) as HTMLInputElement;
    const model = el("input", { type: "text", placeholder: "Model" }) as HTMLInputElement;
    const optional = el("input", { type: "checkbox" }) as HTMLInputElement;
    const createMessage = el("p", { class: "error-line", role: "alert" }, "");
    const createButton = el(
      "button",
      {
        type: "button",
        onclick: () => void create(),
      },
      "Create assessment",
    );
    const create = async (): Promise<void> => {
      createMessage.textContent = "";
      try {
        const assessment = await this.client.createAssessment(
          {
            organization: org.value,
            device_name: device.value,
            manufacturer: manufacturer.value,
            model: model.value,
          },
          optional.checked,
        );
        this.navigate(`#/a/${assessment.id}/questionnaire`);
      } catch (error) {
        if (error instanceof ApiError) {
          createMessage.textContent = error.message;
          return;
        }
        throw error;
      }
    };

    this.root.append(
      el("h1", {}, "MIoT security assessment"),
      el(
        "section",
        { class: "landing-open" },
        el("h2", {}, "Open an assessment"),
        idInput,
        openButton,
      ),
      el(
        "section",
        { class: "landing-create" },
        el("h2", {}, "Start a new assessment"),
        org,
        device,
        manufacturer,
        model,
        el("label", {}, optional, " include the three optional IR8259-series items"),
        createButton,
        createMessage,
      ),
    );
  }

  private async renderAssessment(assessmentId: string, tab: Tab): Promise<void> {
    const catalog = this.catalog;
    if (!catalog) {
      return;
    }
    clear(this.root);

    const nav = el(
      "nav",
      { class: "tabs" },
      ...TABS.map((name) =>
        el(
          "a",
          {
            href: `#/a/${assessmentId}/${name}`,
            class: name === tab ? "tab active" : "tab",
          },
          name,
        ),
      ),
    );
    const body = el("main", { class: "screen" });
    this.root.append(nav, body);

    try {
      if (tab === "questionnaire") {
        const assessment = await this.client.getAssessment(assessmentId);
        const scorePanel = el("aside", { class: "score-panel" });
        const screen = el("div", {});
        body.append(screen, scorePanel);
        this.questionnaire = renderQuestionnaire({
          root: screen,
          client: this.client,
          catalog,
          assessment,
          onAssessmentChanged: (next) => void this.refreshScore(next, scorePanel),
        });
        await this.refreshScore(assessment, scorePanel);
      } else if (tab === "dashboard") {
        await renderDashboard({ root: body, client: this.client, catalog, assessmentId });
      } else {
        await renderWhatIf({ root: body, client: this.client, catalog, assessmentId });
      }
    } catch (error) {
      clear(body);
      body.append(
        el(
          "p",
          { class: "error-line", role: "alert" },
          error instanceof ApiError ? error.message : String(error),
        ),
      );
    }
  }

  private async refreshScore(
    assessment: AssessmentDto,
    panel: HTMLElement,
  ): Promise<void> {
    clear(panel);
    if (assessment.status !== "Complete") {
      const total = Object.keys(assessment.responses).length;
      panel.append(
        el(
          "p",
          { class: "score-pending" },
          `Draft: ${total} answer(s) recorded. The score activates once `,
          "every in-scope expectation is answered.",
        ),
      );
      this.questionnaire?.setReport(null);
      return;
    }
    let report: ScoreReportDto;
    try {
      report = await this.client.getScore(assessment.id);
    } catch (error) {
      if (error instanceof ApiError) {
        panel.append(el("p", { class: "error-line" }, error.message));
        return;
      }
      throw error;
    }
    this.questionnaire?.setReport(report);
    panel.append(
      el(
        "div",
        { class: `tier-banner tier-${report.risk_tier.toLowerCase()}` },
        el("strong", { "data-score": "risk-tier" }, report.risk_tier),
        el("span", { "data-score": "overall-percent" }, `${report.overall.percent}%`),
      ),
      el(
        "a",
        { href: `#/a/${assessment.id}/dashboard`, class: "to-dashboard" },
        "open dashboard",
      ),
    );
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(document.getElementById("app") as HTMLElement);
  void app.start();
}
