// Thin client for the facetlens HTTP service. Every response uses the same
// envelope; unwrap() turns error envelopes into ApiError so callers can
// branch on status and machine-readable code.

import type {
  DimensionDoc,
  ReportedIssueDoc,
  ResultDoc,
  ResultSummary,
  SessionDoc,
  SessionSummary,
  SessionView,
  Side,
  UseCaseDoc,
} from './types.js';

export class ApiError extends Error {
  status: number;
  code: string;
  // current resource version, present on 409 responses so callers can retry
  version: number | null;

  constructor(status: number, code: string, message: string, version: number | null) {
    super(message);
    this.status = status;
    this.code = code;
    this.version = version;
  }
}

interface Envelope<T> {
  status: 'ok' | 'error';
  payload?: T;
  error?: { code: string; message: string };
  version?: number;
}

export class ApiClient {
  baseUrl: string;

  constructor(baseUrl = '') {
    this.baseUrl = baseUrl.replace(/\/$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      (init.headers as Record<string, string>)['content-type'] = 'application/json';
      init.body = JSON.stringify(body);
    }
    const response = await fetch(this.baseUrl + path, init);
    const envelope = (await response.json()) as Envelope<T>;
    if (envelope.status !== 'ok' || !response.ok) {
      const error = envelope.error ?? { code: 'unknown', message: response.statusText };
      throw new ApiError(response.status, error.code, error.message, envelope.version ?? null);
    }
    return envelope.payload as T;
  }

  // ---- catalog ----
  listDimensions(): Promise<DimensionDoc[]> {
    return this.request('GET', '/dimensions');
  }

  listUseCases(): Promise<UseCaseDoc[]> {
    return this.request('GET', '/usecases');
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request('GET', '/sessions');
  }

  listResults(): Promise<ResultSummary[]> {
    return this.request('GET', '/results');
  }

  joinDimensions(ids: string[]): Promise<DimensionDoc> {
    return this.request('POST', '/dimensions/join', { ids });
  }

  // ---- sessions ----
  createSession(body: {
    dimension_ids: string[];
    use_case_id: string;
    assignments?: Record<string, string[]>;
    id?: string;
    author?: string;
  }): Promise<SessionDoc> {
    return this.request('POST', '/sessions', body);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request('GET', `/sessions/${encodeURIComponent(id)}`);
  }

  submitJudgment(
    sessionId: string,
    expectedVersion: number,
    judgment: {
      state_id: string;
      facet_id: string;
      side: Side;
      issues: ReportedIssueDoc[];
      author?: string;
    },
  ): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/judgments`, {
      expected_version: expectedVersion,
      ...judgment,
    });
  }

  closeSession(sessionId: string, expectedVersion: number): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/close`, {
      expected_version: expectedVersion,
    });
  }

  sessionResult(sessionId: string, save = false): Promise<ResultDoc> {
    const query = save ? '?save=true' : '';
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}/result${query}`);
  }

  // ---- results ----
  getResult(id: string): Promise<ResultDoc> {
    return this.request('GET', `/results/${encodeURIComponent(id)}`);
  }

  mergeResults(ids: string[], saveAs?: string): Promise<ResultDoc> {
    const body: Record<string, unknown> = { result_ids: ids };
    if (saveAs) body.save_as = saveAs;
    return this.request('POST', '/results/merge', body);
  }

  verifyMerge(ids: string[]): Promise<{ equal: boolean; merged_issues: number }> {
    return this.request('POST', '/results/verify-merge', { result_ids: ids });
  }
}
