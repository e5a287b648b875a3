// In-memory stand-in for the /api/v1 server, built on fixtures generated by
// the real engine. Every JSON payload served is recorded so tests can assert
// that each score rendered on screen arrived over the (faked) network.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

interface FakeResponse {
  ok: boolean;
  status: number;
  headers: { get(name: string): string | null };
  json(): Promise<unknown>;
  text(): Promise<string>;
}

function jsonResponse(
  record: (payload: unknown) => void,
  payload: unknown,
  status = 200,
  headers: Record<string, string> = {},
): FakeResponse {
  record(payload);
  const lower = Object.fromEntries(
    Object.entries(headers).map(([k, v]) => [k.toLowerCase(), v]),
  );
  return {
    ok: status >= 200 && status < 300,
    status,
    headers: { get: (name: string) => lower[name.toLowerCase()] ?? null },
    json: async () => clone(payload),
    text: async () => JSON.stringify(payload),
  };
}

function svgResponse(body: string): FakeResponse {
  return {
    ok: true,
    status: 200,
    headers: { get: (name) => (name.toLowerCase() === "content-type" ? "image/svg+xml" : null) },
    json: async () => {
      throw new Error("not json");
    },
    text: async () => body,
  };
}

const RADAR_SVG =
  '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 640 640">' +
  '<polygon class="data" points="320,100 540,320 320,540 100,320"/></svg>';

export interface FakeApi {
  fetch: typeof fetch;
  catalog: any;
  assessment: any;
  report: any;
  whatIfVariant: any;
  plan: any;
  served: unknown[];
  conflictNextPut: boolean;
  servedStrings(): Set<string>;
}

export function makeFakeApi(options: { complete?: boolean } = {}): FakeApi {
  const catalog = fixture<any>("catalog.json");
  const assessment = options.complete
    ? fixture<any>("complete_assessment.json")
    : fixture<any>("draft_assessment.json");
  const report = fixture<any>("score_strict.json");
  const plan = fixture<any>("plan_08.json");

  const whatIfVariant = clone(report);
  whatIfVariant.overall.percent = "83.00";
  whatIfVariant.overall.fraction = "0.83";
  whatIfVariant.risk_tier = "Acceptable";
  whatIfVariant.mitigations = ["ACCEPT"];

  let revision = 1;
  const served: unknown[] = [];
  const record = (payload: unknown) => served.push(clone(payload));

  const api: FakeApi = {
    catalog,
    assessment,
    report,
    whatIfVariant,
    plan,
    served,
    conflictNextPut: false,
    servedStrings(): Set<string> {
      const leaves = new Set<string>();
      const walk = (value: unknown): void => {
        if (value === null || value === undefined) {
          return;
        }
        if (Array.isArray(value)) {
          value.forEach(walk);
        } else if (typeof value === "object") {
          Object.values(value as object).forEach(walk);
        } else {
          leaves.add(String(value));
        }
      };
      served.forEach(walk);
      return leaves;
    },
    fetch: undefined as unknown as typeof fetch,
  };

  function scopeIds(): number[] {
    return catalog.expectations
      .filter((e: any) => e.source !== "IR8259Optional" || assessment.include_optional)
      .map((e: any) => e.id);
  }

  function incompleteFindings(): unknown[] {
    return scopeIds()
      .filter((eid) => !(String(eid) in assessment.responses))
      .map((eid) => ({
        expectation_id: eid,
        severity: "Error",
        message: `missing response for expectation ${eid}`,
      }));
  }

  api.fetch = (async (input: any, init: any = {}): Promise<any> => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const method = (init.method ?? "GET").toUpperCase();

    if (path === "/api/v1/catalog") {
      return jsonResponse(record, catalog);
    }

    const putMatch = /^\/api\/v1\/assessments\/([^/]+)\/responses\/(\d+)$/.exec(path);
    if (putMatch && method === "PUT") {
      const headers = Object.fromEntries(
        Object.entries(init.headers ?? {}).map(([k, v]) => [k.toLowerCase(), v]),
      );
      if (api.conflictNextPut) {
        api.conflictNextPut = false;
        return jsonResponse(
          record,
          { status: 409, code: "conflict", message: "stale base revision" },
          409,
        );
      }
      if (headers["if-match"] !== `"${revision}"`) {
        return jsonResponse(
          record,
          { status: 409, code: "conflict", message: "If-Match required or stale" },
          409,
        );
      }
      const eid = Number(putMatch[2]);
      const body = JSON.parse(init.body);
      if (body.level === "DoesNotApply" && !(body.comments ?? "").trim()) {
        return jsonResponse(
          record,
          {
            status: 422,
            code: "validation_failed",
            message: "DoesNotApply requires an explanation in comments",
          },
          422,
        );
      }
      assessment.responses[String(eid)] = {
        expectation_id: eid,
        level: body.level,
        validation_point: body.validation_point ?? "",
        validation_tool: body.validation_tool ?? null,
        control_types: body.control_types ?? [],
        comments: body.comments ?? null,
      };
      if (incompleteFindings().length === 0) {
        assessment.status = "Complete";
      }
      revision += 1;
      return jsonResponse(record, assessment, 200, { ETag: `"${revision}"` });
    }

    const scoreMatch = /^\/api\/v1\/assessments\/([^/]+)\/score$/.exec(path);
    if (scoreMatch) {
      if (assessment.status !== "Complete") {
        return jsonResponse(
          record,
          {
            status: 422,
            code: "incomplete_assessment",
            message: "assessment has blocking findings",
            findings: incompleteFindings(),
          },
          422,
        );
      }
      return jsonResponse(record, report);
    }

    if (/\/what-if$/.test(path) && method === "POST") {
      const deltas = JSON.parse(init.body).deltas as unknown[];
      return jsonResponse(record, deltas.length === 0 ? report : whatIfVariant);
    }

    if (/\/plan$/.test(path) && method === "POST") {
      return jsonResponse(record, plan);
    }

    if (/\/radar$/.test(path)) {
      return svgResponse(RADAR_SVG);
    }

    const getMatch = /^\/api\/v1\/assessments\/([^/]+)$/.exec(path);
    if (getMatch && method === "GET") {
      if (getMatch[1] !== assessment.id) {
        return jsonResponse(
          record,
          { status: 404, code: "not_found", message: "no such assessment" },
          404,
        );
      }
      return jsonResponse(record, assessment, 200, { ETag: `"${revision}"` });
    }

    return jsonResponse(
      record,
      { status: 404, code: "not_found", message: `no route for ${method} ${path}` },
      404,
    );
  }) as typeof fetch;

  return api;
}
