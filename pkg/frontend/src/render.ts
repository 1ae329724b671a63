// DOM construction. Everything goes through el() so views stay XSS-safe:
// text lands in text nodes, never in innerHTML.

import type { GridModel } from './grid.js';
import type { QuadrantModel } from './quadrant.js';
import type { FacetDoc, IssueDoc, ResultDoc, ResultSummary, SessionSummary, Side } from './types.js';

type Child = Node | string | null | undefined;

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(typeof child === 'string' ? document.createTextNode(child) : child);
  }
  return node;
}

export function clear(node: HTMLElement): HTMLElement {
  node.replaceChildren();
  return node;
}

function severityBadge(severity: string | null): HTMLElement | null {
  if (!severity) return null;
  return el('span', { class: `sev sev-${severity}` }, severity);
}

// ---- session list ----

export function sessionList(
  sessions: SessionSummary[],
  onOpen: (id: string) => void,
): HTMLElement {
  if (sessions.length === 0) {
    return el('p', { class: 'muted' }, 'No sessions yet.');
  }
  const items = sessions.map((s) => {
    const link = el(
      'button',
      { class: 'linkish', type: 'button' },
      `${s.id} `,
      el('span', { class: `pill pill-${s.status.toLowerCase()}` }, s.status),
    );
    link.addEventListener('click', () => onOpen(s.id));
    return el(
      'li',
      {},
      link,
      el('div', { class: 'muted small' }, `${s.dimension_ids.join(' + ')} / ${s.use_case_id} / v${s.version}`),
    );
  });
  return el('ul', { class: 'plain' }, ...items);
}

// ---- persona lens ----

export function personaCard(facet: FacetDoc, side: Side): HTMLElement {
  const level = side === 'MIN' ? facet.scale[0] : facet.scale[facet.scale.length - 1];
  const steps = facet.scale.map((label) =>
    el('span', { class: label === level ? 'scale-step active' : 'scale-step' }, label),
  );
  return el(
    'div',
    { class: 'persona-card' },
    el('h4', {}, `Walk as: ${level} ${facet.label.toLowerCase()}`),
    facet.description ? el('p', { class: 'small' }, facet.description) : null,
    el('div', { class: 'scale-row' }, ...steps),
    el(
      'p',
      { class: 'muted small' },
      'Judge each step of the flow as this person would experience it.',
    ),
  );
}

// ---- results list ----

export function resultList(results: ResultSummary[]): HTMLElement {
  if (results.length === 0) {
    return el('p', { class: 'muted' }, 'No saved results.');
  }
  const items = results.map((r) =>
    el(
      'li',
      {},
      el(
        'label',
        { class: 'result-pick' },
        el('input', { type: 'checkbox', class: 'result-check', value: r.id }),
        ` ${r.id}`,
      ),
      el(
        'div',
        { class: 'muted small' },
        `${r.dimension_ids.join(' + ')} / ${r.use_case_id} / ${r.issues} issues / ${(r.density * 100).toFixed(0)}%`,
      ),
    ),
  );
  return el('ul', { class: 'plain' }, ...items);
}

// ---- coverage grid ----

export function coverageGrid(
  model: GridModel,
  onCell: (facetId: string, side: Side, stateId: string) => void,
  interactive: boolean,
): HTMLElement {
  const head = el(
    'tr',
    {},
    el('th', {}, 'Facet'),
    el('th', {}, 'End'),
    ...model.stateIds.map((id) => el('th', {}, id)),
  );
  const rows = model.rows.map((row) => {
    const cells = row.cells.map((cell) => {
      const classes = ['cell', cell.status === 'EVALUATED' ? 'done' : 'pending'];
      if (cell.issue_count > 0) classes.push('issues');
      const label =
        cell.status === 'EVALUATED' ? (cell.issue_count > 0 ? String(cell.issue_count) : 'ok') : '';
      const td = el('td', { class: classes.join(' ') }, label);
      if (interactive) {
        td.addEventListener('click', () => onCell(row.facetId, row.side, cell.state_id));
        td.classList.add('clickable');
        td.title = `${row.facetLabel} at ${row.level}, state ${cell.state_id}`;
      }
      return td;
    });
    return el(
      'tr',
      {},
      el(
        'td',
        { class: 'facet-name' },
        row.facetLabel,
        row.team ? el('span', { class: 'muted small' }, ` (${row.team})`) : null,
      ),
      el('td', { class: 'level' }, row.level),
      ...cells,
    );
  });
  return el(
    'div',
    {},
    el('p', { class: 'muted' }, `Coverage ${(model.density * 100).toFixed(1)}%`),
    el('table', { class: 'grid' }, el('thead', {}, head), el('tbody', {}, ...rows)),
  );
}

// ---- issues ----

export function issueTable(issues: IssueDoc[]): HTMLElement {
  if (issues.length === 0) {
    return el('p', { class: 'muted' }, 'No issues recorded.');
  }
  const rows = issues.map((issue) =>
    el(
      'tr',
      {},
      el('td', {}, issue.state_id),
      el('td', { class: 'mono' }, issue.code),
      el('td', {}, severityBadge(issue.severity)),
      el('td', {}, issue.message),
      el(
        'td',
        { class: 'muted small' },
        issue.provenance.map(([facet, side]) => `${facet}:${side}`).join(', '),
      ),
    ),
  );
  return el(
    'table',
    { class: 'issues' },
    el(
      'thead',
      {},
      el(
        'tr',
        {},
        el('th', {}, 'State'),
        el('th', {}, 'Code'),
        el('th', {}, 'Severity'),
        el('th', {}, 'Message'),
        el('th', {}, 'Facets'),
      ),
    ),
    el('tbody', {}, ...rows),
  );
}

// ---- quadrants ----

export function quadrantView(model: QuadrantModel, result: ResultDoc): HTMLElement {
  void result;
  const corner = (q: QuadrantModel['quadrants'][number]) =>
    el(
      'div',
      { class: 'quadrant' },
      el('h4', {}, `${model.facetA}: ${q.sideA} / ${model.facetB}: ${q.sideB}`),
      el('p', { class: 'muted small' }, `${q.issues.length} issue(s)`),
      el(
        'ul',
        { class: 'plain small' },
        ...q.issues.map((i) => el('li', {}, el('span', { class: 'mono' }, i.code), ` @ ${i.state_id}`)),
      ),
    );
  return el('div', { class: 'quadrants' }, ...model.quadrants.map(corner));
}
