import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { initialState, type ViewState } from '../src/state';
import type {
  BoundsPayload,
  Guidance,
  ImportancePayload,
  ModelFitPayload,
  SpaceDoc,
  TrialRecord,
} from '../src/types';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8')) as T;
}

export const space = load<SpaceDoc>('space.json');
export const trials = load<TrialRecord[]>('trials.json');
export const bounds = load<BoundsPayload>('bounds.json');
export const importance = load<ImportancePayload>('importance.json');
export const modelFit = load<ModelFitPayload>('modelfit.json');

export const guidance: Guidance = { importance, bounds, modelFit };

export function fixtureState(overrides: Partial<ViewState> = {}): ViewState {
  return { ...initialState(space, 7), guidance, ...overrides };
}

export function mount(): HTMLElement {
  const node = document.createElement('div');
  document.body.appendChild(node);
  return node;
}
