// Thin fetch wrapper over the dialogue service. Every mutation returns the
// server's view of the entry; the client holds no inference state.

import type { SessionRecord, Tag, UtteranceEntry, WorldInfo } from './types.js';

export interface UtterancePayload {
  tag?: Tag;
  text?: string;
  code?: string;
  override_candidate?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`API error ${status}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail: unknown = null;
    try {
      detail = (await response.json()).detail;
    } catch {
      detail = await response.text().catch(() => null);
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(private baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listWorlds(): Promise<WorldInfo[]> {
    return parseOrThrow(await fetch(this.url('/worlds')));
  }

  async createSession(world: string, seed?: number): Promise<SessionRecord> {
    const body: Record<string, unknown> = { world };
    if (seed !== undefined) body.seed = seed;
    return parseOrThrow(
      await fetch(this.url('/sessions'), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      }),
    );
  }

  async getSession(sessionId: string): Promise<SessionRecord> {
    return parseOrThrow(await fetch(this.url(`/sessions/${sessionId}`)));
  }

  async postUtterance(sessionId: string, payload: UtterancePayload): Promise<UtteranceEntry> {
    return parseOrThrow(
      await fetch(this.url(`/sessions/${sessionId}/utterances`), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(payload),
      }),
    );
  }

  renderUrl(sessionId: string, entryIndex: number, k: number): string {
    return this.url(`/sessions/${sessionId}/entries/${entryIndex}/render?k=${k}`);
  }

  async fetchRender(sessionId: string, entryIndex: number, k: number): Promise<string | null> {
    const response = await fetch(this.renderUrl(sessionId, entryIndex, k));
    if (!response.ok) return null;
    return response.text();
  }
}
