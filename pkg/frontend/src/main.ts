/**
 * DOM wiring for the review page. All decision logic lives in review.ts;
 * this file renders session state into the static shell and forwards events.
 */

import { ApiClient } from './api';
import { badgeClass, formatKappa, interpretKappa } from './kappa';
import { POLYDRUG_FLAG, Session } from './review';
import type { Decision, Highlight, RecordView, ServiceMeta } from './types';

const ANNOTATOR_KEY = 'drugwatch.annotator';
const STATS_POLL_MS = 15000;

const api = new ApiClient();
let meta: ServiceMeta | null = null;
let session: Session | null = null;
/** One-shot informational line (round closed, ...), separate from errors. */
let info: string | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

// ------------------------------------------------------------------- render

function kappaBadge(label: string, kappa: number | null): string {
  if (kappa === null) {
    return `<span class="badge badge-none">${label}: n/a</span>`;
  }
  const cls = badgeClass(interpretKappa(kappa));
  return `<span class="badge ${cls}" title="${interpretKappa(kappa)}">` +
    `${label}: ${escapeHtml(formatKappa(kappa))}</span>`;
}

function renderStats(): void {
  const s = session?.stats;
  if (!s) {
    el('stats').innerHTML = '';
    return;
  }
  el('stats').innerHTML = `
    <span class="stat">round ${s.round}</span>
    <span class="stat">pending ${s.pending}</span>
    <span class="stat">decided ${s.decided}</span>
    <span class="stat">conflicts ${s.conflict}</span>
    <span class="stat">corrected ${s.corrected} (${(s.correction_rate * 100).toFixed(1)}%)</span>
    ${kappaBadge('drug &kappa;', s.kappa_drug)}
    ${kappaBadge('symptom &kappa;', s.kappa_symptoms)}
    <button type="button" data-action="close-round">close round ${s.round}</button>
  `;
}

function renderNotices(): void {
  const parts: string[] = [];
  if (session?.offline) {
    parts.push(
      '<div class="banner banner-offline">server unreachable ' +
      '<button type="button" data-action="retry">retry</button></div>',
    );
  }
  if (session?.notice) {
    parts.push(`<div class="banner banner-error">${escapeHtml(session.notice)}</div>`);
  }
  if (info) {
    parts.push(`<div class="banner banner-info">${escapeHtml(info)}</div>`);
  }
  el('notices').innerHTML = parts.join('');
}

function highlightChips(items: Highlight[], kind: string): string {
  if (items.length === 0) return '<span class="muted">none</span>';
  return items
    .map(
      (h) =>
        `<span class="chip chip-${kind}" title="token offset ${h.offset}">` +
        `${escapeHtml(h.phrase)} &rarr; ${escapeHtml(h.label)}</span>`,
    )
    .join(' ');
}

function decisionRow(d: Decision): string {
  const flags = d.flags.length ? ` [${d.flags.map(escapeHtml).join(', ')}]` : '';
  return `<li><strong>${escapeHtml(d.annotator)}</strong>: ${escapeHtml(d.drug)}; ` +
    `${d.symptoms.map(escapeHtml).join(', ') || 'no symptoms'}${flags}</li>`;
}

function suggestionBlock(record: RecordView): string {
  const s = record.suggestion;
  if (!s) return '<p class="muted">no model suggestion for this item</p>';
  if (s.status !== 'ok') {
    return `<p class="muted">suggestion unavailable (${escapeHtml(s.status)})</p>`;
  }
  return `
    <dl class="suggestion">
      <dt>drug</dt><dd>${s.drug === null ? '<em>unknown</em>' : escapeHtml(s.drug)}</dd>
      <dt>symptoms</dt><dd>${s.symptoms.map(escapeHtml).join(', ') || '<em>none</em>'}</dd>
      <dt>rationale</dt><dd>${escapeHtml(s.rationale)}</dd>
    </dl>
  `;
}

function renderRecord(): void {
  const target = el('record');
  if (!session) {
    target.innerHTML = '<p class="muted">enter an annotator name to start</p>';
    return;
  }
  const record = session.record;
  if (!record) {
    target.innerHTML = session.drained
      ? '<p class="muted">queue drained; nothing pending for you</p>'
      : '<p class="muted">loading&hellip;</p>';
    return;
  }
  const conflictNote =
    record.status === 'conflict'
      ? `<div class="conflict-note">annotators disagree; your submission becomes the
           adjudicated label<ul>${record.decisions.map(decisionRow).join('')}</ul></div>`
      : '';
  target.innerHTML = `
    <div class="record-head">
      <span class="chip chip-id">${escapeHtml(record.post_id)}</span>
      <span class="chip">round ${record.round}</span>
      <span class="chip chip-${record.status}">${record.status}</span>
      <span class="chip">${escapeHtml(record.post.source)}</span>
    </div>
    <blockquote class="post-text">${escapeHtml(record.post.text)}</blockquote>
    <div class="mentions">
      <div>drug mentions: ${highlightChips(record.highlights.drugs, 'drug')}</div>
      <div>symptom cues: ${highlightChips(record.highlights.symptoms, 'symptom')}</div>
    </div>
    ${conflictNote}
    ${suggestionBlock(record)}
    <div class="actions">
      <button type="button" data-action="accept" title="shortcut: A">accept suggestion</button>
      <button type="button" data-action="edit" title="shortcut: E">edit labels</button>
    </div>
  `;
}

function renderEditor(): void {
  const target = el('editor');
  if (!session || !session.editing || !session.record || !meta) {
    target.innerHTML = '';
    target.classList.add('hidden');
    return;
  }
  target.classList.remove('hidden');
  const draft = session.draft;
  const drugs = meta.drug_classes
    .map(
      (d) => `<label><input type="radio" name="drug" data-drug="${escapeHtml(d)}"
        ${draft.drug === d ? 'checked' : ''}> ${escapeHtml(d)}</label>`,
    )
    .join('');
  const symptoms = meta.symptoms
    .map(
      (s) => `<label><input type="checkbox" data-symptom="${escapeHtml(s)}"
        ${draft.symptoms.includes(s) ? 'checked' : ''}> ${escapeHtml(s)}</label>`,
    )
    .join('');
  const flags = meta.flags
    .map(
      (f) => `<label><input type="checkbox" data-flag="${escapeHtml(f)}"
        ${draft.flags.includes(f) ? 'checked' : ''}> ${escapeHtml(f)}</label>`,
    )
    .join('');
  target.innerHTML = `
    <fieldset><legend>drug class</legend><div class="choices">${drugs}</div></fieldset>
    <fieldset><legend>symptoms</legend><div class="choices choices-wrap">${symptoms}</div></fieldset>
    <fieldset><legend>flags (shortcut: F toggles ${POLYDRUG_FLAG})</legend>
      <div class="choices">${flags}</div></fieldset>
    <div class="actions">
      <button type="button" data-action="submit-draft">submit labels</button>
      <button type="button" data-action="cancel-edit">cancel</button>
    </div>
  `;
}

function render(): void {
  renderStats();
  renderNotices();
  renderRecord();
  renderEditor();
}

// ------------------------------------------------------------------ actions

async function doAccept(): Promise<void> {
  if (!session) return;
  info = null;
  await session.accept();
  render();
}

async function doSubmitDraft(): Promise<void> {
  if (!session) return;
  info = null;
  await session.submitDraft();
  render();
}

async function doCloseRound(): Promise<void> {
  if (!session) return;
  info = null;
  const report = await session.closeRound();
  if (report) {
    info = `round ${report.round} closed: ${report.suggested} suggested, ` +
      `${report.decided} decided, ${report.corrected} corrected`;
    await session.loadNext();
  }
  render();
}

async function doRetry(): Promise<void> {
  if (!session) return;
  await session.retry();
  render();
}

function toggleFlagShortcut(): void {
  if (!session?.record) return;
  session.startEdit();
  session.toggleFlag(POLYDRUG_FLAG);
  render();
}

async function startSession(annotator: string): Promise<void> {
  session = new Session(api, annotator);
  info = null;
  await session.loadNext();
  await session.refreshStats();
  render();
}

// ------------------------------------------------------------------- wiring

function onClick(event: Event): void {
  const target = event.target;
  if (!(target instanceof HTMLElement)) return;
  const button = target.closest('[data-action]');
  if (!(button instanceof HTMLElement)) return;
  switch (button.dataset['action']) {
    case 'accept': void doAccept(); break;
    case 'edit': session?.startEdit(); render(); break;
    case 'cancel-edit': session?.cancelEdit(); render(); break;
    case 'submit-draft': void doSubmitDraft(); break;
    case 'close-round': void doCloseRound(); break;
    case 'retry': void doRetry(); break;
  }
}

function onChange(event: Event): void {
  const input = event.target;
  if (!(input instanceof HTMLInputElement) || !session) return;
  const { drug, symptom, flag } = input.dataset;
  if (drug !== undefined) session.setDrug(drug);
  else if (symptom !== undefined) session.toggleSymptom(symptom);
  else if (flag !== undefined) session.toggleFlag(flag);
  else return;
  renderEditor();
}

function onKey(event: KeyboardEvent): void {
  const target = event.target;
  if (target instanceof HTMLElement && target.closest('input, textarea, select')) {
    return;
  }
  switch (event.key.toLowerCase()) {
    case 'a': void doAccept(); break;
    case 'e': session?.startEdit(); render(); break;
    case 'f': toggleFlagShortcut(); break;
  }
}

function wireAnnotatorBox(): void {
  const input = el('annotator') as HTMLInputElement;
  input.value = localStorage.getItem(ANNOTATOR_KEY) ?? '';
  input.addEventListener('change', () => {
    const name = input.value.trim();
    if (!name) return;
    localStorage.setItem(ANNOTATOR_KEY, name);
    void startSession(name);
  });
}

function wireItemBox(): void {
  const input = el('item-id') as HTMLInputElement;
  input.addEventListener('change', () => {
    const id = input.value.trim();
    if (!id || !session) return;
    info = null;
    void session.loadItem(id).then(render);
  });
}

async function boot(): Promise<void> {
  document.addEventListener('click', onClick);
  document.addEventListener('change', onChange);
  document.addEventListener('keydown', onKey);
  wireAnnotatorBox();
  wireItemBox();
  try {
    meta = await api.meta();
    el('service-line').textContent =
      `${meta.api} ${meta.service_version}; ${meta.drug_classes.length} drug classes, ` +
      `${meta.symptoms.length} symptoms`;
  } catch {
    el('service-line').textContent = 'service unreachable; start `drugwatch serve` and reload';
    return;
  }
  const saved = localStorage.getItem(ANNOTATOR_KEY);
  if (saved) await startSession(saved);
  else render();
  setInterval(() => {
    if (session && !session.offline) {
      void session.refreshStats().then(renderStats);
    }
  }, STATS_POLL_MS);
}

void boot();
