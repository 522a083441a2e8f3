import type { ApiClient } from './api';
import { formatValue } from './pcp';
import type { ViewState } from './state';
import type { ImportancePayload, ModelFitPayload, SpaceDoc, SuggestPayload } from './types';

/** Round scores to fixed decimals so the column still sums to exactly the
 * rounded total (largest-remainder). Display-only; the underlying scores
 * come straight from the payload. */
export function roundScoresForDisplay(scores: number[], decimals = 2): string[] {
  const unit = 10 ** decimals;
  const scaled = scores.map((s) => s * unit);
  const floored = scaled.map(Math.floor);
  const total = Math.round(scaled.reduce((a, b) => a + b, 0));
  let leftover = total - floored.reduce((a, b) => a + b, 0);
  const order = scaled
    .map((s, i) => ({ remainder: s - floored[i], i }))
    .sort((a, b) => b.remainder - a.remainder || a.i - b.i);
  const units = [...floored];
  for (const { i } of order) {
    if (leftover <= 0) break;
    units[i] += 1;
    leftover -= 1;
  }
  return units.map((u) => (u / unit).toFixed(decimals));
}

/** Importance table: selected params sorted by displayed score descending;
 * the displayed column sums to 1.00. Numbers are bound from the payload
 * only, never recomputed client-side. */
export function renderImportanceTable(
  container: HTMLElement,
  importance: ImportancePayload | null,
  message: string | null = null,
): void {
  container.innerHTML = '';
  container.classList.add('importance-panel');
  const heading = document.createElement('h3');
  heading.textContent = 'Importance scores';
  container.appendChild(heading);

  if (message !== null) {
    const note = document.createElement('p');
    note.className = 'panel-message';
    note.textContent = message;
    container.appendChild(note);
    return;
  }
  if (!importance) return;

  if (importance.zero_variance) {
    const note = document.createElement('p');
    note.className = 'panel-message zero-variance';
    note.textContent =
      'The surrogate is constant for this metric: no variance to attribute.';
    container.appendChild(note);
  }

  const rows = [...importance.entries].sort((a, b) => b.displayed_score - a.displayed_score);
  const shown = roundScoresForDisplay(rows.map((r) => r.displayed_score));

  const table = document.createElement('table');
  table.className = 'importance-table';
  table.innerHTML =
    '<thead><tr><th>hyperparameter</th><th>score</th><th>raw fraction</th></tr></thead>';
  const body = document.createElement('tbody');
  rows.forEach((row, i) => {
    const tr = document.createElement('tr');
    tr.innerHTML =
      `<td>${row.params.join(' × ')}</td>` +
      `<td class="score-cell">${shown[i]}</td>` +
      `<td class="raw-cell">${row.raw_fraction.toFixed(4)}</td>`;
    body.appendChild(tr);
  });
  table.appendChild(body);
  const foot = document.createElement('tfoot');
  const sum = rows.reduce((a, r) => a + r.displayed_score, 0);
  foot.innerHTML = `<tr><td>Σ</td><td class="score-sum">${sum.toFixed(2)}</td><td></td></tr>`;
  table.appendChild(foot);
  container.appendChild(table);
}

/** Fit-quality display: cross-validated mean R² and the surrogate's
 * training R², shown clamped at 0 with the raw value alongside. */
export function renderFitDisplay(
  container: HTMLElement,
  surrogateR2: number | null | undefined,
  modelFit: ModelFitPayload | null,
): void {
  container.innerHTML = '';
  container.classList.add('fit-panel');
  const heading = document.createElement('h3');
  heading.textContent = 'Surrogate fit';
  container.appendChild(heading);
  const list = document.createElement('dl');

  const rows: [string, string][] = [];
  if (surrogateR2 === null || surrogateR2 === undefined) {
    rows.push(['training R²', 'n/a (zero-variance metric)']);
  } else {
    rows.push(['training R²', formatR2(surrogateR2)]);
  }
  if (modelFit && modelFit.error) {
    rows.push(['cross-validation', modelFit.error]);
  } else if (modelFit && modelFit.mean_score !== undefined) {
    rows.push([`${modelFit.k}-fold mean R²`, formatR2(modelFit.mean_score)]);
  }
  for (const [term, value] of rows) {
    const dt = document.createElement('dt');
    dt.textContent = term;
    const dd = document.createElement('dd');
    dd.textContent = value;
    list.appendChild(dt);
    list.appendChild(dd);
  }
  container.appendChild(list);
  if (modelFit?.warnings?.length) {
    const note = document.createElement('p');
    note.className = 'panel-message';
    note.textContent = modelFit.warnings.join('; ');
    container.appendChild(note);
  }
}

function formatR2(v: number): string {
  const clamped = Math.max(v, 0);
  return clamped === v ? v.toFixed(3) : `${clamped.toFixed(3)} (raw ${v.toFixed(3)})`;
}

/** Next-batch panel: edit a grid spec, post it to /api/suggest, list the
 * returned configs, and offer them as a JSONL download. */
export function renderNextBatch(
  container: HTMLElement,
  space: SpaceDoc,
  state: ViewState,
  api: ApiClient,
): void {
  container.innerHTML = '';
  container.classList.add('suggest-panel');
  const heading = document.createElement('h3');
  heading.textContent = 'Next batch';
  container.appendChild(heading);

  const strategy = document.createElement('select');
  strategy.className = 'suggest-strategy';
  for (const s of ['adaptive_init', 'naive']) {
    const opt = document.createElement('option');
    opt.value = s;
    opt.textContent = s;
    strategy.appendChild(opt);
  }
  container.appendChild(strategy);

  const spec = document.createElement('textarea');
  spec.className = 'suggest-spec';
  spec.rows = 6;
  spec.value = JSON.stringify(defaultSpec(space), null, 1);
  container.appendChild(spec);

  const button = document.createElement('button');
  button.className = 'suggest-run';
  button.textContent = 'Propose configurations';
  container.appendChild(button);

  const output = document.createElement('div');
  output.className = 'suggest-output';
  container.appendChild(output);

  button.addEventListener('click', async () => {
    output.textContent = '…';
    try {
      const payload = await api.suggest({
        strategy: strategy.value,
        spec: JSON.parse(spec.value),
        metric: state.selectedMetric,
      });
      renderBatch(output, payload);
    } catch (err) {
      output.textContent = `request failed: ${err}`;
    }
  });
}

function defaultSpec(space: SpaceDoc): Record<string, unknown> {
  const spec: Record<string, unknown> = {};
  for (const p of space.params) {
    spec[p.name] = { min: p.lower, max: p.upper, intervals: 3 };
  }
  return spec;
}

export function renderBatch(output: HTMLElement, payload: SuggestPayload): void {
  output.innerHTML = '';
  const count = document.createElement('p');
  count.textContent = `${payload.batch.length} configurations`;
  output.appendChild(count);

  const list = document.createElement('ol');
  list.className = 'suggest-batch';
  for (const item of payload.batch.slice(0, 20)) {
    const li = document.createElement('li');
    li.textContent = Object.entries(item.config)
      .map(([k, v]) => `${k}=${formatValue(v)}`)
      .join(', ');
    list.appendChild(li);
  }
  if (payload.batch.length > 20) {
    const li = document.createElement('li');
    li.textContent = `… ${payload.batch.length - 20} more in the download`;
    list.appendChild(li);
  }
  output.appendChild(list);

  const jsonl = payload.batch
    .map((item) => JSON.stringify({ config: item.config, round: item.round }))
    .join('\n');
  const link = document.createElement('a');
  link.className = 'suggest-download';
  link.download = 'next-batch.jsonl';
  link.textContent = 'Download JSONL';
  link.href = URL.createObjectURL(new Blob([jsonl], { type: 'application/jsonl' }));
  output.appendChild(link);
}
