import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { describe, expect, it } from 'vitest';

import { candidatePickerHtml, entryChartKind, entryHtml, renderStripHtml, transcriptHtml } from '../src/transcript.js';
import { applyEntry, viewFromRecord, type SessionRecord, type UtteranceEntry } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));
const rematch: SessionRecord = JSON.parse(
  readFileSync(join(here, 'fixtures', 'tow_rematch.transcript.json'), 'utf-8'),
);
const sceneEntry: UtteranceEntry = JSON.parse(
  readFileSync(join(here, 'fixtures', 'scene_entry.json'), 'utf-8'),
);

describe('recorded rematch transcript', () => {
  it('contains four entries mirrored into the client view', () => {
    const view = viewFromRecord(rematch);
    expect(view.entries).toHaveLength(4);
    expect(view.worldId).toBe('tug-of-war');
  });

  it('renders every entry with its committed code block', () => {
    const html = transcriptHtml(rematch.entries);
    expect(html.match(/<article class="entry"/g)?.length).toBe(4);
    expect(html).toContain("(condition (won-against '(josh) '(lio)))");
    for (const entry of rematch.entries) {
      expect(html).toContain(`data-index="${entry.index}"`);
    }
  });

  it('gives the query entry a probability-bar chart and conditions no chart', () => {
    expect(entryChartKind(rematch.entries[3])).toBe('probability-bar');
    for (const entry of rematch.entries.slice(0, 3)) {
      expect(entryChartKind(entry)).toBeNull();
    }
    const html = entryHtml(rematch.entries[3]);
    expect(html).toContain('data-chart-kind="probability-bar"');
    expect(html).toContain('P(true) =');
  });
});

describe('candidate picker', () => {
  const twoCandidates: UtteranceEntry = {
    ...rematch.entries[0],
    candidates: [
      { code: '(condition (won-against \'(josh) \'(lio)))', valid: true, reasons: [], temperature: 0.7, score: null },
      { code: '(condition (> (strength \'josh) (strength \'lio)))', valid: true, reasons: [], temperature: 0.7, score: null },
    ],
    chosen: 0,
  };

  it('is hidden for single-candidate entries', () => {
    expect(candidatePickerHtml(rematch.entries[0])).toBe('');
  });

  it('offers an override button per valid candidate and marks the chosen one', () => {
    const html = candidatePickerHtml(twoCandidates);
    expect(html.match(/candidate-pick/g)?.length).toBe(2);
    expect(html).toContain('candidate-chosen');
    expect(html).toContain(`data-entry="${twoCandidates.index}"`);
    expect(html).toContain('data-candidate="1"');
  });

  it('shows rejected candidates only behind the toggle', () => {
    const withInvalid: UtteranceEntry = {
      ...twoCandidates,
      candidates: [
        ...twoCandidates.candidates,
        { code: '(condition (beats 1))', valid: false, reasons: ['unbound symbols: beats'], temperature: 0.7, score: null },
      ],
    };
    expect(candidatePickerHtml(withInvalid, false)).not.toContain('beats');
    const shown = candidatePickerHtml(withInvalid, true);
    expect(shown).toContain('candidate-invalid');
    expect(shown).toContain('unbound symbols: beats');
  });
});

describe('world view panels', () => {
  it('renders a strip with one panel per conditioned sample', () => {
    const ref = sceneEntry.render_ref!;
    const html = renderStripHtml(ref, sceneEntry.index, (entry, k) => `/sessions/x/entries/${entry}/render?k=${k}`);
    expect(html).toContain(`data-render-count="${ref.count}"`);
    expect(html.match(/<figure/g)?.length).toBe(ref.count);
    expect(html).toContain('/sessions/x/entries/0/render?k=1');
  });

  it('embeds the server SVG verbatim via the render endpoint (fixture sanity)', () => {
    const svg = readFileSync(join(here, 'fixtures', 'scene.svg'), 'utf-8');
    expect(svg.startsWith('<svg')).toBe(true);
    expect(svg).toContain('rgb(0,0,255)'); // the committed condition: everything blue
    expect(svg).not.toContain('rgb(255,0,0)');
  });

  it('renders no panel for worlds without renders', () => {
    const html = entryHtml(rematch.entries[0]);
    expect(html).not.toContain('world-strip');
  });
});

describe('override view update', () => {
  it('appends the recommitted entry and renders its code in the view', () => {
    const view = viewFromRecord(rematch);
    const recommitted: UtteranceEntry = {
      ...rematch.entries[0],
      index: 4,
      chosen: 1,
      code: "(condition (> (strength 'josh) (strength 'lio)))",
    };
    const updated = applyEntry(view, recommitted);
    expect(updated.entries).toHaveLength(5);
    const html = transcriptHtml(updated.entries);
    expect(html).toContain("(condition (&gt; (strength 'josh) (strength 'lio)))");
    expect(view.entries).toHaveLength(4); // original view untouched
  });
});
