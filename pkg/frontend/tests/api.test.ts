import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError } from '../src/api';

type FetchArgs = { url: string; init: RequestInit | undefined };

/** Install a fetch stub that records calls and replays canned responses. */
function stubFetch(responder: (url: string, init?: RequestInit) => Response): FetchArgs[] {
  const calls: FetchArgs[] = [];
  vi.stubGlobal('fetch', (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return Promise.resolve(responder(url, init));
  });
  return calls;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('ApiClient url handling', () => {
  it('prefixes every path with /api/v1 on the same origin by default', async () => {
    const calls = stubFetch(() => jsonResponse({ pending: 0 }));
    await new ApiClient().stats();
    expect(calls[0]?.url).toBe('/api/v1/stats');
  });

  it('strips a trailing slash from an explicit base', async () => {
    const calls = stubFetch(() => jsonResponse({ api: 'x' }));
    await new ApiClient('http://localhost:8000/').meta();
    expect(calls[0]?.url).toBe('http://localhost:8000/api/v1/meta');
  });

  it('percent-encodes annotator names and post ids', async () => {
    const calls = stubFetch(() => new Response(null, { status: 204 }));
    await new ApiClient().nextPending('ana lyst/7');
    expect(calls[0]?.url).toBe('/api/v1/queue/next?annotator=ana%20lyst%2F7');
  });
});

describe('ApiClient verbs', () => {
  it('returns null on 204 from the queue', async () => {
    stubFetch(() => new Response(null, { status: 204 }));
    expect(await new ApiClient().nextPending('ana')).toBeNull();
  });

  it('POSTs decisions as JSON with the right content type', async () => {
    const calls = stubFetch(() =>
      jsonResponse({ post_id: 'p1', status: 'decided', corrections: 0 }),
    );
    const body = { annotator: 'ana', drug: 'Heroin', symptoms: ['vomiting'], flags: [] };
    const out = await new ApiClient().decide('p1', body);
    expect(out.status).toBe('decided');
    expect(calls[0]?.url).toBe('/api/v1/items/p1/decision');
    expect(calls[0]?.init?.method).toBe('POST');
    const headers = calls[0]?.init?.headers as Record<string, string>;
    expect(headers['content-type']).toBe('application/json');
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual(body);
  });

  it('closes a round with an empty JSON body', async () => {
    const calls = stubFetch(() =>
      jsonResponse({ round: 2, suggested: 10, decided: 10, corrected: 1,
        correction_rate: 0.1, kappa_drug: null, kappa_symptoms: null }),
    );
    const report = await new ApiClient().closeRound(2);
    expect(report.round).toBe(2);
    expect(calls[0]?.url).toBe('/api/v1/rounds/2/close');
    expect(String(calls[0]?.init?.body)).toBe('{}');
  });
});

describe('ApiError', () => {
  it('carries the status and the detail string from the server', async () => {
    stubFetch(() => jsonResponse({ detail: "unknown symptom label: 'sneezing'" }, 422));
    const err = await new ApiClient().stats().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).detail).toBe("unknown symptom label: 'sneezing'");
    expect((err as ApiError).message).toContain('422');
  });

  it('falls back to the status line when the body is not JSON', async () => {
    stubFetch(
      () => new Response('<html>boom</html>', { status: 502, statusText: 'Bad Gateway' }),
    );
    const err = await new ApiClient().stats().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).detail).toBe('Bad Gateway');
  });

  it('lets network-level failures propagate as TypeError', async () => {
    vi.stubGlobal('fetch', () => Promise.reject(new TypeError('fetch failed')));
    const err = await new ApiClient().stats().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(TypeError);
  });
});
