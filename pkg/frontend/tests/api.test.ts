import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiError, Client } from '../src/api.js';
import type { SessionRecord, UtteranceEntry } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));
const rematch: SessionRecord = JSON.parse(
  readFileSync(join(here, 'fixtures', 'tow_rematch.transcript.json'), 'utf-8'),
);

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('Client', () => {
  it('reconstructs the identical view from GET /sessions/{id}', async () => {
    vi.stubGlobal('fetch', vi.fn(async () => jsonResponse(rematch)));
    const client = new Client('');
    const record = await client.getSession(rematch.session_id);
    expect(record).toEqual(rematch);
  });

  it('round-trips a candidate override through POST', async () => {
    const updated: UtteranceEntry = { ...rematch.entries[0], index: 4, chosen: 1 };
    const fetchMock = vi.fn(async (_url: RequestInfo, init?: RequestInit) => {
      const payload = JSON.parse(String(init?.body));
      expect(payload.override_candidate).toBe(1);
      expect(payload.text).toBe(rematch.entries[0].text);
      return jsonResponse(updated);
    });
    vi.stubGlobal('fetch', fetchMock);
    const client = new Client('');
    const entry = await client.postUtterance(rematch.session_id, {
      tag: 'Condition',
      text: rematch.entries[0].text,
      override_candidate: 1,
    });
    expect(entry.chosen).toBe(1);
    expect(fetchMock).toHaveBeenCalledOnce();
  });

  it('surfaces structured errors with status and detail', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () => jsonResponse({ detail: { error: 'no-valid-candidate', reasons: ['r'] } }, 422)),
    );
    const client = new Client('');
    await expect(client.postUtterance('x', { tag: 'Condition', text: 'y' })).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.status === 422,
    );
  });

  it('builds render URLs the service understands', () => {
    const client = new Client('');
    expect(client.renderUrl('abc', 2, 3)).toBe('/sessions/abc/entries/2/render?k=3');
  });

  it('returns null for missing renders instead of throwing', async () => {
    vi.stubGlobal('fetch', vi.fn(async () => new Response('missing', { status: 404 })));
    const client = new Client('');
    expect(await client.fetchRender('abc', 0, 9)).toBeNull();
  });
});
