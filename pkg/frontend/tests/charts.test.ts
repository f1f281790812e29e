import { describe, expect, it } from 'vitest';

import { chartModel, chartSvg, totalCount } from '../src/charts.js';
import type { PosteriorSummary } from '../src/types.js';

const booleanSummary: PosteriorSummary = {
  kind: 'boolean-probability',
  data: { p: 0.25, stderr: 0.0137 },
  acceptance_rate: 0.11,
  n: 1000,
};

const numericSummary: PosteriorSummary = {
  kind: 'numeric',
  data: {
    mean: 66.2,
    stdev: 15.8,
    min: 20,
    max: 110,
    bin_edges: [20, 50, 80, 110],
    counts: [150, 600, 250],
  },
  acceptance_rate: 0.5,
  n: 1000,
};

const categoricalSummary: PosteriorSummary = {
  kind: 'categorical',
  data: { proportions: { pizza: 0.3, sushi: 0.7 }, counts: { pizza: 300, sushi: 700 } },
  acceptance_rate: 0.9,
  n: 1000,
};

describe('chartModel', () => {
  it('maps boolean summaries to a probability bar', () => {
    const model = chartModel(booleanSummary);
    expect(model.kind).toBe('probability-bar');
    expect(model.p).toBe(0.25);
    expect(model.stderr).toBeCloseTo(0.0137);
  });

  it('maps numeric summaries to histograms whose bars sum to n', () => {
    const model = chartModel(numericSummary);
    expect(model.kind).toBe('histogram');
    expect(totalCount(model)).toBe(numericSummary.n);
  });

  it('maps categorical summaries to a frequency table sorted by count', () => {
    const model = chartModel(categoricalSummary);
    expect(model.kind).toBe('frequency-table');
    expect(model.rows?.map((r) => r.label)).toEqual(['sushi', 'pizza']);
    expect(totalCount(model)).toBe(1000);
    const shares = model.rows!.reduce((a, r) => a + r.share, 0);
    expect(shares).toBeCloseTo(1.0, 9);
  });

  it('maps generic summaries to a frequency table too', () => {
    const model = chartModel({
      kind: 'generic',
      data: { counts: { '(avery)': 4, '()': 2 } },
      acceptance_rate: 1,
      n: 6,
    });
    expect(model.kind).toBe('frequency-table');
    expect(totalCount(model)).toBe(6);
  });
});

describe('chartSvg', () => {
  it('renders a probability bar with the percentage label', () => {
    const svg = chartSvg(chartModel(booleanSummary));
    expect(svg).toContain('chart-probability');
    expect(svg).toContain('25.0%');
    expect(svg).toContain('P(true) = 0.250');
  });

  it('renders one histogram bar per bin, straight from the raw counts', () => {
    const svg = chartSvg(chartModel(numericSummary));
    expect(svg.match(/<rect/g)?.length).toBe(3);
    expect(svg).toContain('mean=66.20');
  });

  it('escapes labels in frequency tables', () => {
    const svg = chartSvg(
      chartModel({
        kind: 'generic',
        data: { counts: { '<dana>': 3 } },
        acceptance_rate: 1,
        n: 3,
      }),
    );
    expect(svg).toContain('&lt;dana&gt;');
    expect(svg).not.toContain('<dana>');
  });
});
