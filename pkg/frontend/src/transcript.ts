// Pure HTML renderers for transcript entries. Returning strings keeps the
// view logic trivially testable; app.ts mounts them and wires events.

import { chartModel, chartSvg } from './charts.js';
import type { RenderRef, UtteranceEntry } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export interface RenderOptions {
  renderUrl?: (entryIndex: number, k: number) => string;
  showInvalidCandidates?: boolean;
}

export function entryChartKind(entry: UtteranceEntry): string | null {
  if (entry.result?.kind !== 'posterior' || !entry.result.summary) return null;
  return chartModel(entry.result.summary).kind;
}

function resultHtml(entry: UtteranceEntry, options: RenderOptions): string {
  const result = entry.result;
  if (!result) return '';
  if (result.kind === 'posterior' && result.summary) {
    const model = chartModel(result.summary);
    const meta = `n=${model.n} · acceptance ${(100 * model.acceptanceRate).toFixed(2)}%`;
    return `<div class="entry-chart" data-chart-kind="${model.kind}">${chartSvg(model)}<div class="chart-meta">${escapeHtml(meta)}</div></div>`;
  }
  if (result.kind === 'definition-installed') {
    return `<div class="entry-defined">· installed ${result.forms?.length ?? 0} definition form(s)</div>`;
  }
  if (result.kind === 'error') {
    return `<div class="entry-error">error: ${escapeHtml(result.message ?? 'unknown')}</div>`;
  }
  if (entry.render_ref && options.renderUrl) {
    return renderStripHtml(entry.render_ref, entry.index, options.renderUrl);
  }
  return '';
}

export function renderStripHtml(
  ref: RenderRef,
  entryIndex: number,
  renderUrl: (entryIndex: number, k: number) => string,
): string {
  const panels = [];
  for (let k = 0; k < ref.count; k++) {
    panels.push(
      `<figure class="world-panel"><img src="${renderUrl(entryIndex, k)}" alt="sampled world ${k}"/><figcaption>sample ${k}</figcaption></figure>`,
    );
  }
  return `<div class="world-strip" data-render-count="${ref.count}">${panels.join('')}</div>`;
}

export function candidatePickerHtml(entry: UtteranceEntry, showInvalid = false): string {
  const candidates = entry.candidates ?? [];
  const valid = candidates.filter((c) => c.valid);
  if (valid.length < 2 && !showInvalid) return '';
  const items = candidates
    .map((candidate, i) => {
      if (!candidate.valid && !showInvalid) return '';
      const chosen = i === entry.chosen ? ' candidate-chosen' : '';
      const invalid = candidate.valid ? '' : ' candidate-invalid';
      const reasons = candidate.valid
        ? ''
        : `<div class="candidate-reasons">${escapeHtml(candidate.reasons.join('; '))}</div>`;
      const button = candidate.valid
        ? `<button class="candidate-pick" data-entry="${entry.index}" data-candidate="${i}">use</button>`
        : '';
      return `<li class="candidate${chosen}${invalid}"><code>${escapeHtml(candidate.code)}</code>${button}${reasons}</li>`;
    })
    .join('');
  return `<details class="candidates"><summary>${candidates.length} candidate(s)</summary><ul>${items}</ul></details>`;
}

export function entryHtml(entry: UtteranceEntry, options: RenderOptions = {}): string {
  const tag = entry.tag ? `<span class="tag tag-${entry.tag.toLowerCase()}">${entry.tag}</span>` : '';
  const pieces = [
    `<div class="entry-utterance">${tag}<span class="utterance-text">${escapeHtml(entry.text)}</span></div>`,
    `<pre class="entry-code"><code>${escapeHtml(entry.code)}</code></pre>`,
    candidatePickerHtml(entry, options.showInvalidCandidates ?? false),
    resultHtml(entry, options),
  ];
  return `<article class="entry" data-index="${entry.index}">${pieces.join('')}</article>`;
}

export function transcriptHtml(entries: UtteranceEntry[], options: RenderOptions = {}): string {
  return entries.map((entry) => entryHtml(entry, options)).join('\n');
}
