/**
 * Review-session logic, kept free of DOM so it is unit-testable.
 *
 * The one rule that matters most here: accepting a suggestion must send the
 * suggested labels back exactly as the server handed them out. No resorting,
 * no deduplication, no case changes. `acceptBody` is the only place an
 * accept payload is built.
 */

import { ApiClient, ApiError } from './api';
import type {
  DecisionBody,
  DecisionResponse,
  QueueStats,
  RecordView,
  RoundReport,
} from './types';

export const POLYDRUG_FLAG = 'polydrug_uncertainty';

/** Editable working copy of the labels for the record on screen. */
export interface Draft {
  drug: string | null;
  symptoms: string[];
  flags: string[];
}

export function emptyDraft(): Draft {
  return { drug: null, symptoms: [], flags: [] };
}

/** Seed the editor from the record's suggestion, when it is usable. */
export function draftFromSuggestion(record: RecordView | null): Draft {
  const s = record?.suggestion;
  if (!s || s.status !== 'ok') return emptyDraft();
  return { drug: s.drug, symptoms: [...s.symptoms], flags: [] };
}

/**
 * Decision payload for accepting the suggestion verbatim.
 * Throws when there is nothing acceptable; the caller shows the message.
 */
export function acceptBody(record: RecordView, annotator: string): DecisionBody {
  const s = record.suggestion;
  if (!s || s.status !== 'ok') {
    throw new Error('no usable suggestion on this item; label it manually');
  }
  if (s.drug === null) {
    throw new Error('suggestion has no drug label; pick one manually');
  }
  if (s.symptoms.length === 0) {
    throw new Error('suggestion lists no symptoms; add a symptom or a flag');
  }
  return { annotator, drug: s.drug, symptoms: [...s.symptoms], flags: [] };
}

/** Decision payload from an edited draft. Throws on an incomplete draft. */
export function decisionBody(draft: Draft, annotator: string): DecisionBody {
  if (draft.drug === null) {
    throw new Error('pick a drug class before submitting');
  }
  if (draft.symptoms.length === 0 && draft.flags.length === 0) {
    throw new Error('a decision needs at least one symptom or one flag');
  }
  return {
    annotator,
    drug: draft.drug,
    symptoms: [...draft.symptoms],
    flags: [...draft.flags],
  };
}

export function setDrug(draft: Draft, drug: string): Draft {
  return { ...draft, drug };
}

/** Add the symptom if absent (at the end), remove it if present. */
export function toggleSymptom(draft: Draft, symptom: string): Draft {
  const symptoms = draft.symptoms.includes(symptom)
    ? draft.symptoms.filter((s) => s !== symptom)
    : [...draft.symptoms, symptom];
  return { ...draft, symptoms };
}

export function toggleFlag(draft: Draft, flag: string): Draft {
  const flags = draft.flags.includes(flag)
    ? draft.flags.filter((f) => f !== flag)
    : [...draft.flags, flag];
  return { ...draft, flags };
}

/**
 * State machine behind the page. Holds the record on screen, the running
 * stats, and the current notice, and knows how each server answer moves the
 * state. Rendering reads these fields after every action.
 *
 * Error policy:
 *  - ApiError (409 duplicate, 422 bad labels, 404, ...) -> `notice` carries
 *    the server's detail and the record stays on screen.
 *  - TypeError from fetch (server down, network gone) -> `offline` is set and
 *    the last state is kept so `retry` can resume where the user was.
 */
export class Session {
  readonly api: ApiClient;
  readonly annotator: string;

  record: RecordView | null = null;
  stats: QueueStats | null = null;
  notice: string | null = null;
  offline = false;
  editing = false;
  draft: Draft = emptyDraft();
  /** True once the queue has answered 204 and nothing new arrived. */
  drained = false;

  constructor(api: ApiClient, annotator: string) {
    this.api = api;
    this.annotator = annotator;
  }

  /** Pull the next pending record and reset the editor around it. */
  async loadNext(): Promise<void> {
    const next = await this.guard(() => this.api.nextPending(this.annotator));
    if (next === undefined) return;
    this.record = next;
    this.drained = next === null;
    this.editing = false;
    this.draft = draftFromSuggestion(next);
  }

  /**
   * Jump to a specific item by id, e.g. a conflict that needs adjudication.
   * The queue only hands out pending items, so this is the way a conflicted
   * record gets on screen.
   */
  async loadItem(postId: string): Promise<void> {
    const rec = await this.guard(() => this.api.item(postId));
    if (rec === undefined) return;
    this.record = rec;
    this.drained = false;
    this.editing = false;
    this.draft = draftFromSuggestion(rec);
  }

  async refreshStats(): Promise<void> {
    const stats = await this.guard(() => this.api.stats(), { keepNotice: true });
    if (stats !== undefined) this.stats = stats;
  }

  /** Accept the suggestion on the current record verbatim. */
  async accept(): Promise<DecisionResponse | null> {
    const record = this.record;
    if (!record) return null;
    let body: DecisionBody;
    try {
      body = acceptBody(record, this.annotator);
    } catch (err) {
      this.notice = err instanceof Error ? err.message : String(err);
      return null;
    }
    return this.submit(record, body);
  }

  /** Submit the edited draft for the current record. */
  async submitDraft(): Promise<DecisionResponse | null> {
    const record = this.record;
    if (!record) return null;
    let body: DecisionBody;
    try {
      body = decisionBody(this.draft, this.annotator);
    } catch (err) {
      this.notice = err instanceof Error ? err.message : String(err);
      return null;
    }
    return this.submit(record, body);
  }

  startEdit(): void {
    if (this.record) this.editing = true;
  }

  /** Drop edits and fall back to the suggestion's labels. */
  cancelEdit(): void {
    this.editing = false;
    this.draft = draftFromSuggestion(this.record);
  }

  setDrug(drug: string): void {
    this.draft = setDrug(this.draft, drug);
  }

  toggleSymptom(symptom: string): void {
    this.draft = toggleSymptom(this.draft, symptom);
  }

  toggleFlag(flag: string): void {
    this.draft = toggleFlag(this.draft, flag);
  }

  /** Close the round the stats endpoint reports as open. */
  async closeRound(): Promise<RoundReport | null> {
    if (!this.stats) await this.refreshStats();
    const round = this.stats?.round;
    if (round === undefined) return null;
    const report = await this.guard(() => this.api.closeRound(round));
    if (report === undefined) return null;
    await this.refreshStats();
    return report;
  }

  /** Leave offline mode and re-sync both the record and the stats. */
  async retry(): Promise<void> {
    this.offline = false;
    await this.loadNext();
    if (!this.offline) await this.refreshStats();
  }

  /**
   * Conflict records take a second opinion already; their resolution goes to
   * the adjudication endpoint. Everything else is an ordinary decision.
   */
  private async submit(
    record: RecordView,
    body: DecisionBody,
  ): Promise<DecisionResponse | null> {
    const response = await this.guard(() =>
      record.status === 'conflict'
        ? this.api.adjudicate(record.post_id, body)
        : this.api.decide(record.post_id, body),
    );
    if (response === undefined) return null;
    await this.loadNext();
    await this.refreshStats();
    return response;
  }

  /**
   * Run one API call, translating failures into state: ApiError details land
   * in `notice`, network failures set `offline`. Returns undefined when the
   * call did not complete.
   */
  private async guard<T>(
    op: () => Promise<T>,
    opts: { keepNotice?: boolean } = {},
  ): Promise<T | undefined> {
    if (!opts.keepNotice) this.notice = null;
    try {
      const out = await op();
      this.offline = false;
      return out;
    } catch (err) {
      if (err instanceof ApiError) {
        this.notice = err.detail;
      } else if (err instanceof TypeError) {
        this.offline = true;
      } else {
        throw err;
      }
      return undefined;
    }
  }
}
