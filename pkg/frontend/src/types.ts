// Wire types mirrored from the dialogue service's JSON API. The client never
// computes anything statistical itself; these are read-only views.

export type Tag = 'Condition' | 'Query' | 'Define' | 'ConstructFragment';

export interface WorldInfo {
  id: string;
  render_kind: string;
  forms: number;
}

export interface CandidateBrief {
  code: string;
  valid: boolean;
  reasons: string[];
  temperature: number;
  score: number | null;
}

export interface BooleanSummaryData {
  p: number;
  stderr: number;
}

export interface NumericSummaryData {
  mean: number;
  stdev: number;
  min: number;
  max: number;
  bin_edges: number[];
  counts: number[];
}

export interface CategoricalSummaryData {
  proportions: Record<string, number>;
  counts: Record<string, number>;
}

export interface GenericSummaryData {
  counts: Record<string, number>;
}

export interface PosteriorSummary {
  kind: 'boolean-probability' | 'numeric' | 'categorical' | 'generic';
  data: BooleanSummaryData | NumericSummaryData | CategoricalSummaryData | GenericSummaryData;
  acceptance_rate: number;
  n: number;
}

export interface EntryResult {
  kind: 'none' | 'posterior' | 'definition-installed' | 'error';
  summary?: PosteriorSummary;
  forms?: string[];
  attempts?: number;
  accepted?: number;
  message?: string;
}

export interface RenderRef {
  count: number;
  entry: number;
}

export interface UtteranceEntry {
  index: number;
  tag: Tag | null;
  text: string;
  candidates: CandidateBrief[];
  chosen: number | null;
  code: string;
  result: EntryResult;
  render_ref: RenderRef | null;
}

export interface SessionRecord {
  schema_version: number;
  session_id: string;
  world_id: string;
  created_at: string;
  seed: number;
  budget: { target_accepted: number; max_attempts: number; parallel_chains: number };
  status: 'active' | 'closed';
  entries: UtteranceEntry[];
}

export interface ClientSessionView {
  sessionId: string;
  worldId: string;
  entries: UtteranceEntry[];
  pending: boolean;
}

export function viewFromRecord(record: SessionRecord): ClientSessionView {
  return {
    sessionId: record.session_id,
    worldId: record.world_id,
    entries: [...record.entries],
    pending: false,
  };
}

// Committed entries are append-only on the server; the view mirrors that.
export function applyEntry(view: ClientSessionView, entry: UtteranceEntry): ClientSessionView {
  return { ...view, entries: [...view.entries, entry], pending: false };
}
