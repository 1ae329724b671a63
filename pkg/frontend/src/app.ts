// Page wiring: session picker on the left, active session on the right.
// State lives in the controller; this module only reacts and re-renders.

import { ApiClient, ApiError } from './api.js';
import { SessionController } from './controller.js';
import { gridModel } from './grid.js';
import { quadrantModel } from './quadrant.js';
import {
  clear,
  coverageGrid,
  el,
  issueTable,
  personaCard,
  quadrantView,
  resultList,
  sessionList,
} from './render.js';
import type { DimensionDoc, ReportedIssueDoc, ResultDoc, Side } from './types.js';

const api = new ApiClient('');
const controller = new SessionController(api);

// ===== DOM =====
const sessionsBox = document.getElementById('sessions')!;
const createForm = document.getElementById('create-form') as HTMLFormElement;
const dimsSelect = document.getElementById('create-dims') as HTMLSelectElement;
const usecaseSelect = document.getElementById('create-usecase') as HTMLSelectElement;
const sessionIdInput = document.getElementById('create-id') as HTMLInputElement;
const assignmentsInput = document.getElementById('create-assignments') as HTMLTextAreaElement;
const joinPreview = document.getElementById('join-preview')!;
const authorInput = document.getElementById('author') as HTMLInputElement;
const resultsBox = document.getElementById('results')!;
const mergeButton = document.getElementById('merge-button') as HTMLButtonElement;
const detail = document.getElementById('detail')!;
const statusLine = document.getElementById('status-line')!;

let dimensionDocs: DimensionDoc[] = [];
let lastResult: ResultDoc | null = null;
let judging: { facetId: string; side: Side; stateId: string } | null = null;

function flash(message: string, isError = false) {
  statusLine.textContent = message;
  statusLine.className = isError ? 'error' : 'ok';
  if (message) {
    window.setTimeout(() => {
      if (statusLine.textContent === message) statusLine.textContent = '';
    }, 4000);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}

// ===== left pane =====

async function refreshSidebar() {
  const [sessions, dimensions, usecases, results] = await Promise.all([
    api.listSessions(),
    api.listDimensions(),
    api.listUseCases(),
    api.listResults(),
  ]);
  dimensionDocs = dimensions;
  clear(sessionsBox).append(sessionList(sessions, (id) => void openSession(id)));
  clear(dimsSelect).append(
    ...dimensions.map((d) => el('option', { value: d.id }, `${d.id} (${d.facets.length} facets)`)),
  );
  clear(usecaseSelect).append(...usecases.map((u) => el('option', { value: u.id }, u.id)));
  clear(resultsBox).append(resultList(results));
  renderJoinPreview();
}

// Preview what joining the selected dimensions gives: facets shared between
// selections collapse to a single row, and that is the point of joining.
// Display-only set arithmetic; the server performs the actual join.
function renderJoinPreview() {
  const picked = [...dimsSelect.selectedOptions].map((o) => o.value);
  const docs = dimensionDocs.filter((d) => picked.includes(d.id));
  if (docs.length < 2) {
    joinPreview.textContent = '';
    return;
  }
  const counts = new Map<string, number>();
  for (const doc of docs) {
    for (const facet of doc.facets) counts.set(facet.id, (counts.get(facet.id) ?? 0) + 1);
  }
  const shared = [...counts.entries()].filter(([, n]) => n > 1).map(([id]) => id).sort();
  const total = docs.reduce((n, d) => n + d.facets.length, 0);
  joinPreview.textContent =
    shared.length > 0
      ? `join: ${counts.size} facets (${total} before dedup; shared: ${shared.join(', ')})`
      : `join: ${counts.size} facets, none shared`;
}

dimsSelect.addEventListener('change', renderJoinPreview);

// "facet-id: ana, joao" lines -> assignment map
function parseAssignments(text: string): Record<string, string[]> | undefined {
  const assignments: Record<string, string[]> = {};
  for (const rawLine of text.split('\n')) {
    const line = rawLine.trim();
    if (!line) continue;
    const colon = line.indexOf(':');
    if (colon < 1) throw new Error(`bad subteam line: ${line}`);
    const facetId = line.slice(0, colon).trim();
    const members = line
      .slice(colon + 1)
      .split(',')
      .map((m) => m.trim())
      .filter(Boolean);
    if (members.length === 0) throw new Error(`no members for ${facetId}`);
    assignments[facetId] = members;
  }
  return Object.keys(assignments).length > 0 ? assignments : undefined;
}

createForm.addEventListener('submit', (event) => {
  event.preventDefault();
  void (async () => {
    const dimensionIds = [...dimsSelect.selectedOptions].map((o) => o.value);
    if (dimensionIds.length === 0 || !usecaseSelect.value) {
      flash('pick at least one dimension and a use case', true);
      return;
    }
    controller.author = authorInput.value.trim();
    try {
      await controller.create({
        dimension_ids: dimensionIds,
        use_case_id: usecaseSelect.value,
        assignments: parseAssignments(assignmentsInput.value),
        id: sessionIdInput.value.trim() || undefined,
      });
      sessionIdInput.value = '';
      assignmentsInput.value = '';
      await refreshSidebar();
      await renderSession();
    } catch (err) {
      flash(describe(err), true);
    }
  })();
});

// ===== session pane =====

async function openSession(id: string) {
  try {
    controller.author = authorInput.value.trim();
    await controller.open(id);
    judging = null;
    await renderSession();
  } catch (err) {
    flash(describe(err), true);
  }
}

function judgmentForm(): HTMLElement {
  const target = judging!;
  const form = el('form', { class: 'judgment' }) as HTMLFormElement;
  const facet = controller.view!.dimensions
    .flatMap((d) => d.facets)
    .find((f) => f.id === target.facetId);
  const rows = el('div', { id: 'issue-rows' });
  const addRow = () => {
    rows.append(
      el(
        'div',
        { class: 'issue-row' },
        el('input', { class: 'issue-code', placeholder: 'code (kebab-case)' }),
        el('input', { class: 'issue-message', placeholder: 'what goes wrong here' }),
        (() => {
          const sel = el('select', { class: 'issue-severity' });
          for (const s of ['', 'low', 'medium', 'high']) {
            sel.append(el('option', { value: s }, s || '(no severity)'));
          }
          return sel;
        })(),
      ),
    );
  };
  addRow();
  const addButton = el('button', { type: 'button' }, '+ issue');
  addButton.addEventListener('click', addRow);
  const note = el(
    'p',
    { class: 'muted small' },
    `Judging ${target.facetId} at ${target.side} in state ${target.stateId}.`,
  );

  const send = async (issues: ReportedIssueDoc[]) => {
    try {
      const outcome = await controller.submit(target.stateId, target.facetId, target.side, issues);
      flash(
        outcome.retried
          ? `saved after refresh (someone else judged first); now v${outcome.version}`
          : `saved, v${outcome.version}`,
      );
      judging = null;
      await renderSession();
    } catch (err) {
      flash(describe(err), true);
    }
  };

  const cleanButton = el('button', { type: 'button', class: 'clean' }, 'No issues here');
  cleanButton.addEventListener('click', () => void send([]));

  if (facet) form.append(personaCard(facet, target.side));
  form.append(
    note,
    rows,
    el(
      'div',
      { class: 'controls' },
      addButton,
      el('button', { type: 'submit' }, 'Submit judgment'),
      cleanButton,
    ),
  );
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const issues: ReportedIssueDoc[] = [];
    for (const row of rows.querySelectorAll('.issue-row')) {
      const code = (row.querySelector('.issue-code') as HTMLInputElement).value.trim();
      const message = (row.querySelector('.issue-message') as HTMLInputElement).value.trim();
      const severity = (row.querySelector('.issue-severity') as HTMLSelectElement).value || null;
      if (code) issues.push({ code, message, severity });
    }
    void send(issues);
  });
  return form;
}

async function renderSession() {
  const view = controller.view;
  if (!view) return;
  lastResult = await controller.result();
  const result = lastResult;
  const session = view.session;

  const header = el(
    'div',
    { class: 'session-head' },
    el('h2', {}, session.id),
    el('span', { class: `pill pill-${session.status.toLowerCase()}` }, session.status),
    el('span', { class: 'muted' }, ` v${session.version} `),
  );
  if (session.status === 'OPEN') {
    const closeButton = el('button', { type: 'button' }, 'Close session');
    closeButton.addEventListener('click', () => {
      void (async () => {
        try {
          await controller.close();
          await refreshSidebar();
          await renderSession();
        } catch (err) {
          flash(describe(err), true);
        }
      })();
    });
    const saveButton = el('button', { type: 'button' }, 'Save result');
    saveButton.addEventListener('click', () => {
      void (async () => {
        try {
          await controller.result(true);
          flash(`result saved as ${session.id}.result.json`);
        } catch (err) {
          flash(describe(err), true);
        }
      })();
    });
    header.append(closeButton, saveButton);
  } else {
    const saveButton = el('button', { type: 'button' }, 'Save result');
    saveButton.addEventListener('click', () => {
      void (async () => {
        await controller.result(true);
        flash(`result saved as ${session.id}.result.json`);
      })();
    });
    header.append(saveButton);
  }

  const model = gridModel(view, result);
  const grid = coverageGrid(
    model,
    (facetId, side, stateId) => {
      judging = { facetId, side, stateId };
      void renderSession();
    },
    session.status === 'OPEN',
  );

  // walkthrough stepper: jump to the first unjudged cell in grid order
  let stepper: HTMLElement | null = null;
  if (session.status === 'OPEN') {
    outer: for (const row of model.rows) {
      for (const cell of row.cells) {
        if (cell.status === 'PENDING') {
          const next = { facetId: row.facetId, side: row.side, stateId: cell.state_id };
          const button = el('button', { type: 'button' }, 'Judge next pending cell');
          button.addEventListener('click', () => {
            judging = next;
            void renderSession();
          });
          stepper = button;
          break outer;
        }
      }
    }
  }

  // quadrant picker: cross any two facets of the session scope
  const facetIds = view.dimensions
    .flatMap((d) => d.facets.map((f) => f.id))
    .filter((id, i, all) => all.indexOf(id) === i)
    .sort();
  const selectA = el('select', { id: 'quad-a' }) as HTMLSelectElement;
  const selectB = el('select', { id: 'quad-b' }) as HTMLSelectElement;
  for (const id of facetIds) {
    selectA.append(el('option', { value: id }, id));
    selectB.append(el('option', { value: id }, id));
  }
  if (facetIds.length > 1) selectB.selectedIndex = 1;
  const quadrantBox = el('div', { id: 'quadrant-box' });
  const drawQuadrants = () => {
    clear(quadrantBox);
    if (!lastResult || selectA.value === selectB.value) return;
    quadrantBox.append(quadrantView(quadrantModel(lastResult, selectA.value, selectB.value), lastResult));
  };
  selectA.addEventListener('change', drawQuadrants);
  selectB.addEventListener('change', drawQuadrants);

  if (stepper) header.append(stepper);

  clear(detail).append(
    header,
    judging ? judgmentForm() : el('p', { class: 'muted small' },
      session.status === 'OPEN' ? 'Click a grid cell to record a judgment.' : 'Session is closed.'),
    grid,
    el('h3', {}, 'Issues so far'),
    issueTable(result.issues),
    el('h3', {}, 'Intersection quadrants'),
    el('div', { class: 'controls' }, selectA, el('span', {}, ' x '), selectB),
    quadrantBox,
  );
  drawQuadrants();
}

// ===== merge view =====

mergeButton.addEventListener('click', () => {
  void (async () => {
    const ids = [...resultsBox.querySelectorAll<HTMLInputElement>('.result-check:checked')].map(
      (box) => box.value,
    );
    if (ids.length < 2) {
      flash('pick at least two results to merge', true);
      return;
    }
    try {
      const [merged, check] = await Promise.all([api.mergeResults(ids), api.verifyMerge(ids)]);
      const badge = check.equal
        ? el('span', { class: 'pill pill-open' }, 'merge-consistent')
        : el('span', { class: 'pill pill-bad' }, 'MISMATCH');
      const evaluated = merged.coverage.filter((c) => c.status === 'EVALUATED').length;
      const density = merged.coverage.length > 0 ? evaluated / merged.coverage.length : 0;
      clear(detail).append(
        el('div', { class: 'session-head' }, el('h2', {}, ids.join(' + ')), badge),
        el(
          'p',
          { class: 'muted' },
          `Merged ${ids.length} results: ${merged.issues.length} issues, ` +
            `coverage ${(density * 100).toFixed(1)}%. The badge compares this merge ` +
            'against a flat union of the inputs recomputed server-side.',
        ),
        el('h3', {}, 'Merged issues'),
        issueTable(merged.issues),
      );
    } catch (err) {
      flash(describe(err), true);
    }
  })();
});

// ===== boot =====

void refreshSidebar().catch((err) => flash(describe(err), true));
