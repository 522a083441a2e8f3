import { ApiClient, ApiError } from './api';
import { renderFitDisplay, renderImportanceTable, renderNextBatch } from './panels';
import { renderParallelCoordinates, type PcpCallbacks } from './pcp';
import {
  initialState,
  setBrush,
  setMetric,
  toggleParam,
  type ViewState,
} from './state';
import type { SpaceDoc, TrialRecord } from './types';

const api = new ApiClient();

let space: SpaceDoc;
let trials: TrialRecord[] = [];
let state: ViewState;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function render(): void {
  const callbacks: PcpCallbacks = {
    onToggleParam(name) {
      state = toggleParam(state, name);
      render();
      void refreshImportance(); // only the importance selection changes
    },
    onSelectMetric(name) {
      state = setMetric(state, name);
      render();
      void refreshGuidance(); // one fetch feeds bands, table, and fit display
    },
    onBrush(axis, brush) {
      state = setBrush(state, axis, brush);
      render();
    },
  };
  renderParallelCoordinates(el('plot'), trials, space, state, callbacks);
  if (state.showGuidance) {
    renderImportanceTable(el('importance'), state.guidance?.importance ?? null, state.guidanceMessage);
    renderFitDisplay(
      el('fit'),
      state.guidance?.bounds.surrogate_r2,
      state.guidance?.modelFit ?? null,
    );
  } else {
    el('importance').innerHTML = '';
    el('fit').innerHTML = '';
  }
  renderNextBatch(el('suggest'), space, state, api);

  const toggle = el('guidance-toggle') as HTMLInputElement;
  toggle.checked = state.showGuidance;
}

async function refreshGuidance(): Promise<void> {
  try {
    const guidance = await api.guidance(
      state.selectedMetric,
      [...state.selectedParams],
      state.seed,
    );
    if (guidance === null) return; // superseded or stale: keep the newer state
    state = { ...state, guidance, guidanceMessage: null };
  } catch (err) {
    const unavailable = err instanceof ApiError ? err.unavailable() : null;
    state = {
      ...state,
      guidance: null,
      guidanceMessage: unavailable
        ? `Guidance needs at least ${unavailable.required_minimum} usable trials ` +
          `(have ${unavailable.usable_trials}).`
        : `Guidance request failed: ${err}`,
    };
  }
  render();
}

async function refreshImportance(): Promise<void> {
  if (!state.guidance) return;
  try {
    const importance = await api.importanceOnly(
      state.selectedMetric,
      [...state.selectedParams],
      state.seed,
    );
    state = { ...state, guidance: { ...state.guidance, importance } };
    render();
  } catch {
    void refreshGuidance();
  }
}

async function bootstrap(): Promise<void> {
  space = await api.space();
  trials = await api.trials();
  const params = new URLSearchParams(window.location.search);
  state = initialState(space, Number(params.get('seed') ?? 0));

  el('guidance-toggle').addEventListener('change', (ev) => {
    state = { ...state, showGuidance: (ev.target as HTMLInputElement).checked };
    render();
  });
  el('reload').addEventListener('click', () => {
    void (async () => {
      trials = await api.trials();
      render();
      await refreshGuidance();
    })();
  });

  render();
  await refreshGuidance();
}

void bootstrap();
