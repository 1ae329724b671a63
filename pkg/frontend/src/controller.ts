// Session state machine shared by the page and the tests. Keeps the current
// session view plus the version the server last confirmed, and funnels every
// mutation through the optimistic-concurrency handshake.

import { ApiClient, ApiError } from './api.js';
import type { ReportedIssueDoc, ResultDoc, SessionView, Side } from './types.js';

export interface SubmitOutcome {
  // true when the first attempt hit a stale version and was replayed
  retried: boolean;
  version: number;
}

export class SessionController {
  readonly api: ApiClient;
  view: SessionView | null = null;
  author = '';

  constructor(api: ApiClient) {
    this.api = api;
  }

  get session() {
    if (!this.view) throw new Error('no session loaded');
    return this.view.session;
  }

  async open(sessionId: string): Promise<SessionView> {
    this.view = await this.api.getSession(sessionId);
    return this.view;
  }

  async create(body: {
    dimension_ids: string[];
    use_case_id: string;
    assignments?: Record<string, string[]>;
    id?: string;
  }): Promise<SessionView> {
    const doc = await this.api.createSession({ ...body, author: this.author });
    return this.open(doc.id);
  }

  /**
   * Submit one judgment. On a version conflict the controller refreshes the
   * session and replays the judgment once against the server's version; a
   * second conflict propagates to the caller.
   */
  async submit(
    stateId: string,
    facetId: string,
    side: Side,
    issues: ReportedIssueDoc[],
  ): Promise<SubmitOutcome> {
    const judgment = {
      state_id: stateId,
      facet_id: facetId,
      side,
      issues,
      author: this.author,
    };
    try {
      const doc = await this.api.submitJudgment(this.session.id, this.session.version, judgment);
      this.view = { ...this.view!, session: doc };
      return { retried: false, version: doc.version };
    } catch (err) {
      if (!(err instanceof ApiError) || err.status !== 409) throw err;
      await this.open(this.session.id);
      const doc = await this.api.submitJudgment(this.session.id, this.session.version, judgment);
      this.view = { ...this.view!, session: doc };
      return { retried: true, version: doc.version };
    }
  }

  async close(): Promise<void> {
    const doc = await this.api.closeSession(this.session.id, this.session.version);
    this.view = { ...this.view!, session: doc };
  }

  result(save = false): Promise<ResultDoc> {
    return this.api.sessionResult(this.session.id, save);
  }
}
