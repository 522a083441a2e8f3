import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api';
import { initialState, passesBrushes, setBrush, toggleParam } from '../src/state';
import { bounds, importance, modelFit, space } from './helpers';

type Responder = (url: string) => unknown;

function mockFetch(responder: Responder): string[] {
  const urls: string[] = [];
  vi.stubGlobal(
    'fetch',
    vi.fn(async (url: string) => {
      urls.push(url);
      return {
        ok: true,
        status: 200,
        json: async () => responder(url),
      };
    }),
  );
  return urls;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('view state', () => {
  it('keeps at least one param selected', () => {
    let state = initialState(space);
    for (const p of space.params) state = toggleParam(state, p.name);
    expect(state.selectedParams.size).toBe(1);
  });

  it('exactly one metric at a time', () => {
    const state = initialState(space);
    expect(state.selectedMetric).toBe(space.metrics[0].name);
  });

  it('brush filtering covers params and metrics', () => {
    const trial = { config: { dropout: 0.3 }, metrics: { score: 0.8 } };
    expect(passesBrushes(trial, new Map([['dropout', [0.2, 0.4] as [number, number]]]))).toBe(true);
    expect(passesBrushes(trial, new Map([['score', [0.9, 1.0] as [number, number]]]))).toBe(false);
  });

  it('setBrush(null) clears one axis only', () => {
    let state = initialState(space);
    state = setBrush(state, 'dropout', [0.1, 0.2]);
    state = setBrush(state, 'width', [128, 512]);
    state = setBrush(state, 'dropout', null);
    expect([...state.brushes.keys()]).toEqual(['width']);
  });
});

describe('api client request shapes', () => {
  function respond(version: number): Responder {
    return (url) => {
      if (url.includes('/api/healthz')) return { status: 'ok', version };
      if (url.includes('/api/importance')) return importance;
      if (url.includes('/api/bounds')) return bounds;
      if (url.includes('/api/model-fit')) return modelFit;
      throw new Error(`unexpected ${url}`);
    };
  }

  it('toggling a param refetches importance only, never bounds', async () => {
    const urls = mockFetch(respond(3));
    const api = new ApiClient();
    await api.importanceOnly('score', ['dropout'], 7);
    expect(urls).toHaveLength(1);
    expect(urls[0]).toContain('/api/importance');
    expect(urls[0]).toContain('params=dropout');
    expect(urls[0]).not.toContain('bounds');
  });

  it('guidance fetches all three reports with the same metric and seed', async () => {
    const urls = mockFetch(respond(3));
    const api = new ApiClient();
    const guidance = await api.guidance('score', ['dropout', 'width'], 7);
    expect(guidance).not.toBeNull();
    const reports = urls.filter((u) => !u.includes('healthz'));
    expect(reports).toHaveLength(3);
    for (const u of reports) {
      expect(u).toContain('metric=score');
      expect(u).toContain('seed=7');
    }
  });

  it('discards a response when the dataset version moved during the fetch', async () => {
    let version = 3;
    const responder = respond(0);
    mockFetch((url) => {
      if (url.includes('/api/healthz')) return { status: 'ok', version: version++ };
      return responder(url);
    });
    const api = new ApiClient();
    expect(await api.guidance('score', ['dropout'], 7)).toBeNull();
  });

  it('a superseded request is dropped (last write wins)', async () => {
    mockFetch(respond(3));
    const api = new ApiClient();
    const first = api.guidance('score', ['dropout'], 7);
    const second = api.guidance('score', ['dropout'], 8);
    expect(await first).toBeNull();
    expect(await second).not.toBeNull();
  });
});
