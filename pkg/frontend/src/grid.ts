// Coverage grid model: one row per (facet, extreme), one column per state.
// Pure data transforms; render.ts turns these into DOM.

import type { CoverageCellDoc, ResultDoc, SessionView, Side } from './types.js';

export interface GridRow {
  facetId: string;
  facetLabel: string;
  side: Side;
  // level label at this extreme, e.g. "risk-averse"
  level: string;
  team: string | null;
  cells: CoverageCellDoc[];
}

export interface GridModel {
  stateIds: string[];
  rows: GridRow[];
  density: number;
}

function teamFor(view: SessionView, facetId: string): string | null {
  for (const [team, facets] of Object.entries(view.session.assignments)) {
    if (facets.includes(facetId)) return team;
  }
  return null;
}

export function gridModel(view: SessionView, result: ResultDoc): GridModel {
  const byKey = new Map<string, CoverageCellDoc>();
  for (const cell of result.coverage) {
    byKey.set(`${cell.facet_id}|${cell.extreme}|${cell.state_id}`, cell);
  }
  const facets = new Map<string, { label: string; scale: string[] }>();
  for (const dim of view.dimensions) {
    for (const facet of dim.facets) {
      facets.set(facet.id, { label: facet.label, scale: facet.scale });
    }
  }
  const stateIds = view.use_case.states.map((s) => s.id);
  const rows: GridRow[] = [];
  for (const facetId of [...facets.keys()].sort()) {
    const { label, scale } = facets.get(facetId)!;
    for (const side of ['MIN', 'MAX'] as Side[]) {
      rows.push({
        facetId,
        facetLabel: label,
        side,
        level: side === 'MIN' ? scale[0] : scale[scale.length - 1],
        team: teamFor(view, facetId),
        cells: stateIds.map(
          (stateId) =>
            byKey.get(`${facetId}|${side}|${stateId}`) ?? {
              facet_id: facetId,
              extreme: side,
              state_id: stateId,
              status: 'PENDING',
              issue_count: 0,
            },
        ),
      });
    }
  }
  const total = rows.length * stateIds.length;
  const done = rows.reduce(
    (n, row) => n + row.cells.filter((c) => c.status === 'EVALUATED').length,
    0,
  );
  return { stateIds, rows, density: total === 0 ? 0 : done / total };
}
