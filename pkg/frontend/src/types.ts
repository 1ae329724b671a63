// Shapes of the documents the service exchanges. These mirror the canonical
// JSON files on disk, so field names follow the wire format exactly.

export type Side = 'MIN' | 'MAX';

export interface FacetDoc {
  id: string;
  label: string;
  scale: string[];
  description: string;
}

export interface DimensionDoc {
  kind: 'dimension';
  format_version: number;
  id: string;
  label: string;
  facets: FacetDoc[];
}

export interface StateDoc {
  id: string;
  label: string;
  attributes: Record<string, string | number | boolean>;
}

export interface UseCaseDoc {
  kind: 'usecase';
  format_version: number;
  id: string;
  label: string;
  states: StateDoc[];
}

export interface ReportedIssueDoc {
  code: string;
  message: string;
  severity: string | null;
}

export interface JudgmentDoc {
  event: 'judgment';
  state_id: string;
  facet_id: string;
  side: Side;
  issues: ReportedIssueDoc[];
  author: string;
  timestamp: string;
}

export interface SessionDoc {
  id: string;
  dimension_ids: string[];
  use_case_id: string;
  assignments: Record<string, string[]>;
  status: 'OPEN' | 'CLOSED';
  version: number;
  judgments: JudgmentDoc[];
}

export interface SessionView {
  session: SessionDoc;
  dimensions: DimensionDoc[];
  use_case: UseCaseDoc;
}

export interface IssueDoc {
  code: string;
  state_id: string;
  message: string;
  severity: string | null;
  provenance: [string, Side][];
}

export interface CoverageCellDoc {
  facet_id: string;
  extreme: Side;
  state_id: string;
  status: 'EVALUATED' | 'PENDING';
  issue_count: number;
}

export interface ResultDoc {
  kind: 'result';
  format_version: number;
  inputs: {
    dimension_ids: string[];
    use_case_id: string;
    rule_set_ids: string[];
    session_ids: string[];
  };
  state_ids: string[];
  issues: IssueDoc[];
  coverage: CoverageCellDoc[];
}

export interface SessionSummary {
  id: string;
  status: 'OPEN' | 'CLOSED';
  version: number;
  dimension_ids: string[];
  use_case_id: string;
}

export interface ResultSummary {
  id: string;
  use_case_id: string;
  dimension_ids: string[];
  issues: number;
  density: number;
}
