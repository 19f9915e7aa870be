/**
 * Thin fetch client for the /api/v1 review service.
 *
 * Server-reported failures (4xx/5xx) become ApiError with the HTTP status
 * and the server's `detail` string, so callers can render 409/422 inline.
 * Network-level failures keep their TypeError and are treated as "offline"
 * by the caller.
 */

import type {
  DecisionBody,
  DecisionResponse,
  QueueStats,
  RecordView,
  RoundReport,
  ServiceMeta,
} from './types';

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = 'ApiError';
    this.status = status;
    this.detail = detail;
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
  } catch {
    // not JSON; fall through to the status line
  }
  return response.statusText || `status ${response.status}`;
}

export class ApiClient {
  private readonly base: string;

  constructor(base = '') {
    // '' means same-origin, the normal deployment behind `drugwatch serve`
    this.base = base.replace(/\/$/, '');
  }

  private url(path: string): string {
    return `${this.base}/api/v1${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.url(path));
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.url(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return (await response.json()) as T;
  }

  meta(): Promise<ServiceMeta> {
    return this.getJson('/meta');
  }

  /** Oldest pending item this annotator has not decided; null when empty. */
  async nextPending(annotator: string): Promise<RecordView | null> {
    const response = await fetch(
      this.url(`/queue/next?annotator=${encodeURIComponent(annotator)}`),
    );
    if (response.status === 204) return null;
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return (await response.json()) as RecordView;
  }

  item(postId: string): Promise<RecordView> {
    return this.getJson(`/items/${encodeURIComponent(postId)}`);
  }

  decide(postId: string, body: DecisionBody): Promise<DecisionResponse> {
    return this.postJson(`/items/${encodeURIComponent(postId)}/decision`, body);
  }

  adjudicate(postId: string, body: DecisionBody): Promise<DecisionResponse> {
    return this.postJson(`/items/${encodeURIComponent(postId)}/adjudication`, body);
  }

  stats(): Promise<QueueStats> {
    return this.getJson('/stats');
  }

  closeRound(roundNo: number): Promise<RoundReport> {
    return this.postJson(`/rounds/${roundNo}/close`, {});
  }
}
