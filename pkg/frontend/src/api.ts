import type {
  Guidance,
  GuidanceUnavailable,
  SpaceDoc,
  SuggestPayload,
  TrialRecord,
} from './types';

/** Thin client over the /api endpoints with last-write-wins semantics:
 * a guidance response is dropped if a newer request started meanwhile or
 * the dataset version moved on while it was in flight. */
export class ApiClient {
  private latestRequest = 0;

  constructor(private base = '') {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    const body = await res.json();
    if (!res.ok) throw new ApiError(res.status, body);
    return body as T;
  }

  space(): Promise<SpaceDoc> {
    return this.getJson('/api/space');
  }

  trials(): Promise<TrialRecord[]> {
    return this.getJson('/api/trials');
  }

  async version(): Promise<number> {
    const health = await this.getJson<{ status: string; version: number }>('/api/healthz');
    return health.version;
  }

  /** Fetch all three reports from one surrogate state. Resolves null when a
   * newer fetch superseded this one (stale responses are discarded). */
  async guidance(metric: string, params: string[], seed: number): Promise<Guidance | null> {
    const ticket = ++this.latestRequest;
    const before = await this.version();
    const query = `metric=${encodeURIComponent(metric)}&seed=${seed}`;
    const [importance, bounds, modelFit] = await Promise.all([
      this.getJson<Guidance['importance']>(
        `/api/importance?${query}&params=${encodeURIComponent(params.join(','))}`,
      ),
      this.getJson<Guidance['bounds']>(`/api/bounds?${query}`),
      this.getJson<Guidance['modelFit']>(`/api/model-fit?${query}`),
    ]);
    const after = await this.version();
    if (ticket !== this.latestRequest || after !== before) return null;
    return { importance, bounds, modelFit };
  }

  /** Re-fetch only the importance selection; bounds always cover all dims. */
  async importanceOnly(
    metric: string,
    params: string[],
    seed: number,
  ): Promise<Guidance['importance']> {
    const query = `metric=${encodeURIComponent(metric)}&seed=${seed}`;
    return this.getJson(`/api/importance?${query}&params=${encodeURIComponent(params.join(','))}`);
  }

  async suggest(body: unknown): Promise<SuggestPayload> {
    const res = await fetch(this.base + '/api/suggest', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    const payload = await res.json();
    if (!res.ok) throw new ApiError(res.status, payload);
    return payload as SuggestPayload;
  }
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`API error ${status}`);
  }

  unavailable(): GuidanceUnavailable | null {
    if (this.status === 409 && typeof this.body === 'object' && this.body !== null) {
      return this.body as GuidanceUnavailable;
    }
    return null;
  }
}
