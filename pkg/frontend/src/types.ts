/** Wire formats of the tuning API. These mirror the server payloads exactly;
 * the client never recomputes any number it can fetch. */

export interface ParamDoc {
  name: string;
  kind: 'continuous' | 'discrete';
  lower: number;
  upper: number;
  step?: number;
  display_scale?: 'linear' | 'log';
}

export interface MetricDoc {
  name: string;
  direction: 'maximize' | 'minimize';
}

export interface SpaceDoc {
  params: ParamDoc[];
  metrics: MetricDoc[];
}

export interface TrialRecord {
  id: string;
  config: Record<string, number>;
  metrics: Record<string, number>;
  status: 'complete' | 'early_stopped';
  created_at: string;
}

export interface ImportanceEntry {
  params: string[];
  raw_fraction: number;
  displayed_score: number;
}

export interface ImportancePayload {
  metric: string;
  total_variance: number;
  entries: ImportanceEntry[];
  zero_variance: boolean;
}

export interface BoundsParam {
  name: string;
  lo: number;
  hi: number;
  support: number;
}

export interface BoundsPayload {
  metric: string;
  direction: 'maximize' | 'minimize';
  n_trees: number;
  surrogate_r2: number | null;
  params: BoundsParam[];
}

export interface ModelFitPayload {
  metric: string;
  k?: number;
  seed?: number;
  fold_scores?: (number | null)[];
  mean_score?: number;
  n_train?: number;
  warnings?: string[];
  error?: string;
}

export interface GuidanceUnavailable {
  error: string;
  metric: string;
  usable_trials: number;
  required_minimum: number;
}

export interface Guidance {
  importance: ImportancePayload;
  bounds: BoundsPayload;
  modelFit: ModelFitPayload;
}

export interface SuggestItem {
  config: Record<string, number>;
  round: number;
}

export interface SuggestPayload {
  batch: SuggestItem[];
  state: unknown | null;
}
