// DOM shell: session lifecycle, the compose box with its three-way tag
// control, candidate override clicks, and transcript refresh. One utterance
// is in flight per session at a time, mirroring the server's serialization.

import { ApiError, Client } from './api.js';
import { transcriptHtml } from './transcript.js';
import { applyEntry, viewFromRecord, type ClientSessionView, type Tag } from './types.js';

const client = new Client('');

interface AppState {
  view: ClientSessionView | null;
  showInvalid: boolean;
}

const state: AppState = { view: null, showInvalid: false };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(message: string, isError = false): void {
  const status = el<HTMLDivElement>('status');
  status.textContent = message;
  status.className = isError ? 'status status-error' : 'status';
}

function refreshTranscript(): void {
  const container = el<HTMLDivElement>('transcript');
  if (!state.view) {
    container.innerHTML = '<p class="empty">No session. Pick a world and start one.</p>';
    return;
  }
  container.innerHTML = transcriptHtml(state.view.entries, {
    renderUrl: (entry, k) => client.renderUrl(state.view!.sessionId, entry, k),
    showInvalidCandidates: state.showInvalid,
  });
  container.scrollTop = container.scrollHeight;
}

async function loadWorlds(): Promise<void> {
  const select = el<HTMLSelectElement>('world-select');
  const worlds = await client.listWorlds();
  select.innerHTML = worlds
    .map((w) => `<option value="${w.id}">${w.id} (${w.render_kind})</option>`)
    .join('');
}

async function startSession(): Promise<void> {
  const world = el<HTMLSelectElement>('world-select').value;
  setStatus(`creating ${world} session…`);
  try {
    const record = await client.createSession(world);
    state.view = viewFromRecord(record);
    el<HTMLSpanElement>('session-label').textContent = `${record.world_id} · ${record.session_id}`;
    setStatus('session ready');
    refreshTranscript();
  } catch (err) {
    setStatus(describeError(err), true);
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const detail = err.detail as { error?: string; reasons?: string[]; message?: string } | null;
    if (detail?.error === 'no-valid-candidate') {
      return `no valid translation: ${(detail.reasons ?? []).slice(0, 3).join('; ')}`;
    }
    if (detail?.error === 'zero-acceptance') {
      return 'zero acceptance: the evidence is contradictory or too improbable at this budget';
    }
    return `server error ${err.status}: ${detail?.message ?? ''}`;
  }
  return err instanceof Error ? err.message : String(err);
}

async function sendUtterance(): Promise<void> {
  if (!state.view) {
    setStatus('start a session first', true);
    return;
  }
  if (state.view.pending) return;
  const input = el<HTMLInputElement>('utterance-input');
  const text = input.value.trim();
  if (!text) return;
  const tag = (document.querySelector('input[name="tag"]:checked') as HTMLInputElement)
    .value as Tag;
  state.view.pending = true;
  el<HTMLButtonElement>('send-button').disabled = true;
  setStatus('translating and sampling…');
  try {
    const payload = text.startsWith('(') ? { code: text } : { tag, text };
    const entry = await client.postUtterance(state.view.sessionId, payload);
    state.view = applyEntry(state.view, entry);
    input.value = '';
    setStatus(`entry ${entry.index} committed`);
  } catch (err) {
    setStatus(describeError(err), true); // session state unchanged on failure
  } finally {
    state.view.pending = false;
    el<HTMLButtonElement>('send-button').disabled = false;
    refreshTranscript();
  }
}

export async function overrideCandidate(entryIndex: number, candidate: number): Promise<void> {
  if (!state.view) return;
  const entry = state.view.entries[entryIndex];
  if (!entry) return;
  setStatus(`recommitting entry ${entryIndex} with candidate ${candidate}…`);
  try {
    const updated = await client.postUtterance(state.view.sessionId, {
      tag: entry.tag ?? undefined,
      text: entry.text,
      override_candidate: candidate,
    });
    state.view = applyEntry(state.view, updated);
    setStatus(`candidate ${candidate} committed as entry ${updated.index}`);
  } catch (err) {
    setStatus(describeError(err), true);
  }
  refreshTranscript();
}

function wire(): void {
  el<HTMLButtonElement>('start-button').addEventListener('click', () => void startSession());
  el<HTMLButtonElement>('send-button').addEventListener('click', () => void sendUtterance());
  el<HTMLInputElement>('utterance-input').addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void sendUtterance();
  });
  el<HTMLInputElement>('show-invalid').addEventListener('change', (event) => {
    state.showInvalid = (event.target as HTMLInputElement).checked;
    refreshTranscript();
  });
  el<HTMLDivElement>('transcript').addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains('candidate-pick')) {
      const entry = Number(target.dataset.entry);
      const candidate = Number(target.dataset.candidate);
      void overrideCandidate(entry, candidate);
    }
  });
}

export async function boot(): Promise<void> {
  wire();
  try {
    await loadWorlds();
    setStatus('ready');
  } catch (err) {
    setStatus(describeError(err), true);
  }
  refreshTranscript();
}

if (typeof document !== 'undefined' && document.getElementById('transcript')) {
  void boot();
}
