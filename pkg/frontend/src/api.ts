// Typed client for the /api/v1 endpoints. Tracks the ETag of every
// assessment it has seen so writes carry the right If-Match header; a 409
// from the server surfaces as an ApiError with code "conflict" and the
// caller decides whether to refetch and retry.

import type {
  AssessmentDto,
  CatalogDto,
  DeviceMetaDto,
  FindingDto,
  HistoryEventDto,
  RemediationPlanDto,
  ResponseDto,
  ScoreReportDto,
  WhatIfDeltaDto,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public findings: FindingDto[] = [],
  ) {
    super(message);
  }
}

export type ScoreParams = {
  na_mode?: string;
  threshold?: string;
  floor?: string;
  include_optional?: string;
};

async function raiseForStatus(response: Response): Promise<Response> {
  if (response.ok) {
    return response;
  }
  let code = "error";
  let message = `HTTP ${response.status}`;
  let findings: FindingDto[] = [];
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
    findings = body.findings ?? [];
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(response.status, code, message, findings);
}

export class ApiClient {
  private etags = new Map<string, string>();

  constructor(private base: string = "") {}

  etagOf(assessmentId: string): string | undefined {
    return this.etags.get(assessmentId);
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await raiseForStatus(await fetch(this.base + path));
    return (await response.json()) as T;
  }

  async getCatalog(): Promise<CatalogDto> {
    return this.getJson<CatalogDto>("/api/v1/catalog");
  }

  async createAssessment(
    device: Partial<DeviceMetaDto>,
    includeOptional: boolean,
  ): Promise<AssessmentDto> {
    const response = await raiseForStatus(
      await fetch(`${this.base}/api/v1/assessments`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ device, include_optional: includeOptional }),
      }),
    );
    const assessment = (await response.json()) as AssessmentDto;
    this.rememberEtag(assessment.id, response);
    return assessment;
  }

  async getAssessment(assessmentId: string): Promise<AssessmentDto> {
    const response = await raiseForStatus(
      await fetch(`${this.base}/api/v1/assessments/${assessmentId}`),
    );
    this.rememberEtag(assessmentId, response);
    return (await response.json()) as AssessmentDto;
  }

  async putResponse(
    assessmentId: string,
    expectationId: number,
    body: Omit<ResponseDto, "expectation_id">,
  ): Promise<AssessmentDto> {
    const etag = this.etags.get(assessmentId);
    const response = await raiseForStatus(
      await fetch(
        `${this.base}/api/v1/assessments/${assessmentId}/responses/${expectationId}`,
        {
          method: "PUT",
          headers: {
            "content-type": "application/json",
            ...(etag ? { "if-match": etag } : {}),
          },
          body: JSON.stringify(body),
        },
      ),
    );
    this.rememberEtag(assessmentId, response);
    return (await response.json()) as AssessmentDto;
  }

  async getScore(assessmentId: string, params: ScoreParams = {}): Promise<ScoreReportDto> {
    const query = new URLSearchParams(params as Record<string, string>).toString();
    return this.getJson<ScoreReportDto>(
      `/api/v1/assessments/${assessmentId}/score${query ? `?${query}` : ""}`,
    );
  }

  async whatIf(
    assessmentId: string,
    deltas: WhatIfDeltaDto[],
  ): Promise<ScoreReportDto> {
    const response = await raiseForStatus(
      await fetch(`${this.base}/api/v1/assessments/${assessmentId}/what-if`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ deltas }),
      }),
    );
    return (await response.json()) as ScoreReportDto;
  }

  async planRemediation(
    assessmentId: string,
    target: string,
  ): Promise<RemediationPlanDto> {
    const response = await raiseForStatus(
      await fetch(`${this.base}/api/v1/assessments/${assessmentId}/plan`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ target }),
      }),
    );
    return (await response.json()) as RemediationPlanDto;
  }

  async getRadarSvg(
    assessmentId: string,
    params: Record<string, string> = {},
  ): Promise<string> {
    const query = new URLSearchParams(params).toString();
    const response = await raiseForStatus(
      await fetch(
        `${this.base}/api/v1/assessments/${assessmentId}/radar${query ? `?${query}` : ""}`,
      ),
    );
    return response.text();
  }

  async getHistory(assessmentId: string): Promise<HistoryEventDto[]> {
    return this.getJson<HistoryEventDto[]>(
      `/api/v1/assessments/${assessmentId}/history`,
    );
  }

  private rememberEtag(assessmentId: string, response: Response): void {
    const etag = response.headers.get("etag");
    if (etag) {
      this.etags.set(assessmentId, etag);
    }
  }
}
