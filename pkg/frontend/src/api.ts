/** Typed client for the review service. All requests carry the bearer
 * token; feedback writes carry an Idempotency-Key so network retries replay
 * the first response instead of tripping the duplicate-verdict guard. */

import type { FeedbackResponse, FindingsResponse, RankResponse, Report } from "./types";

export interface ApiConfig {
  baseUrl: string;
  token: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(
  config: ApiConfig,
  path: string,
  init: RequestInit = {},
): Promise<T> {
  const headers = new Headers(init.headers);
  headers.set("Authorization", `Bearer ${config.token}`);
  const response = await fetch(`${config.baseUrl}${path}`, { ...init, headers });
  const body = await response.text();
  if (!response.ok) {
    let message = body;
    try {
      message = (JSON.parse(body) as { error?: string }).error ?? body;
    } catch {
      // keep the raw body
    }
    throw new ApiError(response.status, message);
  }
  return JSON.parse(body) as T;
}

export function fetchReport(config: ApiConfig, docId: string): Promise<Report> {
  return request<Report>(config, `/reports/${docId}`);
}

export function fetchFindings(config: ApiConfig, docId: string): Promise<FindingsResponse> {
  return request<FindingsResponse>(config, `/documents/${docId}/findings`);
}

export function fetchRank(
  config: ApiConfig,
  docId: string,
  cohort = "all",
): Promise<RankResponse> {
  return request<RankResponse>(
    config,
    `/reports/${docId}/rank?cohort=${encodeURIComponent(cohort)}`,
  );
}

export function submitFeedback(
  config: ApiConfig,
  findingId: string,
  verdict: "confirm" | "reject",
  idempotencyKey: string,
  note = "",
): Promise<FeedbackResponse> {
  return request<FeedbackResponse>(config, `/findings/${findingId}/feedback`, {
    method: "POST",
    headers: {
      "Content-Type": "application/json",
      "Idempotency-Key": idempotencyKey,
    },
    body: JSON.stringify({ verdict, note }),
  });
}

let keyCounter = 0;

/** One key per user intent (click); reuse it only for retries of that intent. */
export function newIdempotencyKey(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  keyCounter += 1;
  return `key-${Date.now()}-${keyCounter}`;
}
