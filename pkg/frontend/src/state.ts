import type { Guidance, SpaceDoc } from './types';

/** Interval filter on one axis, in data units. Brushes only filter the
 * polyline display; they never reach the server-side fit. */
export type Brush = [number, number];

export interface ViewState {
  selectedParams: Set<string>; // checkbox per hyperparameter axis
  selectedMetric: string; // exactly one radio
  brushes: Map<string, Brush>;
  seed: number;
  showGuidance: boolean; // overlay toggle: bands + panels on/off
  guidance: Guidance | null;
  guidanceMessage: string | null; // e.g. the server's too-few-trials response
}

export function initialState(space: SpaceDoc, seed = 0): ViewState {
  return {
    selectedParams: new Set(space.params.map((p) => p.name)),
    selectedMetric: space.metrics[0].name,
    brushes: new Map(),
    seed,
    showGuidance: true,
    guidance: null,
    guidanceMessage: null,
  };
}

export function toggleParam(state: ViewState, name: string): ViewState {
  const selected = new Set(state.selectedParams);
  if (selected.has(name)) {
    if (selected.size > 1) selected.delete(name); // keep the selection nonempty
  } else {
    selected.add(name);
  }
  return { ...state, selectedParams: selected };
}

export function setMetric(state: ViewState, name: string): ViewState {
  return { ...state, selectedMetric: name };
}

export function setBrush(state: ViewState, axis: string, brush: Brush | null): ViewState {
  const brushes = new Map(state.brushes);
  if (brush === null) brushes.delete(axis);
  else brushes.set(axis, brush);
  return { ...state, brushes };
}

/** Does a trial pass every active brush? Axes may be params or metrics. */
export function passesBrushes(
  trial: { config: Record<string, number>; metrics: Record<string, number> },
  brushes: Map<string, Brush>,
): boolean {
  for (const [axis, [lo, hi]] of brushes) {
    const value = axis in trial.config ? trial.config[axis] : trial.metrics[axis];
    if (value === undefined || value < lo || value > hi) return false;
  }
  return true;
}
