import * as d3 from 'd3';

import {
  AXIS_SPACING,
  BAND_WIDTH,
  MARGIN,
  PLOT_HEIGHT,
  axisLayout,
  metricScale,
  paramScale,
  plotWidth,
  type AxisScale,
} from './scales';
import { passesBrushes, type Brush, type ViewState } from './state';
import type { SpaceDoc, TrialRecord } from './types';

export interface PcpCallbacks {
  onToggleParam(name: string): void;
  onSelectMetric(name: string): void;
  onBrush(axis: string, brush: Brush | null): void;
}

const noop: PcpCallbacks = {
  onToggleParam: () => {},
  onSelectMetric: () => {},
  onBrush: () => {},
};

/** Full re-render of the parallel-coordinates view: one polyline per trial,
 * hyperparameter axes left / metric axes right, orange predicted-optimal
 * bands (hover shows per-tree support), checkbox/radio controls atop the
 * axes, and a brush per axis that dims non-matching polylines. */
export function renderParallelCoordinates(
  container: HTMLElement,
  trials: TrialRecord[],
  space: SpaceDoc,
  state: ViewState,
  callbacks: PcpCallbacks = noop,
): void {
  container.innerHTML = '';
  container.classList.add('pcp');
  container.style.position = 'relative';

  const width = plotWidth(space);
  const axes = axisLayout(space);
  const scales = new Map<string, AxisScale>();
  for (const p of space.params) scales.set(p.name, paramScale(p));
  for (const m of space.metrics) scales.set(m.name, metricScale(m.name, trials));

  renderControls(container, space, state, callbacks, axes);

  const svg = d3
    .select(container)
    .append('svg')
    .attr('class', 'pcp-svg')
    .attr('width', width)
    .attr('height', PLOT_HEIGHT)
    .attr('viewBox', `0 0 ${width} ${PLOT_HEIGHT}`);

  // Predicted-optimal bands sit under the polylines so data stays readable.
  if (state.showGuidance && state.guidance) {
    const bandLayer = svg.append('g').attr('class', 'pcp-bands');
    for (const bp of state.guidance.bounds.params) {
      const axis = axes.find((a) => a.name === bp.name);
      const scale = scales.get(bp.name);
      if (!axis || !scale) continue;
      const yHi = scale(bp.hi);
      const yLo = scale(bp.lo);
      bandLayer
        .append('rect')
        .attr('class', 'pcp-band')
        .attr('data-param', bp.name)
        .attr('x', axis.x - BAND_WIDTH / 2)
        .attr('y', Math.min(yHi, yLo))
        .attr('width', BAND_WIDTH)
        .attr('height', Math.max(Math.abs(yLo - yHi), 1))
        .append('title')
        .text(
          `${bp.name}: predicted optimal [${formatValue(bp.lo)}, ${formatValue(bp.hi)}], ` +
            `support ${(bp.support * 100).toFixed(0)}% of ${state.guidance.bounds.n_trees} trees`,
        );
    }
  }

  const line = d3
    .line<{ axis: string; value: number | undefined }>()
    .defined((d) => d.value !== undefined && Number.isFinite(d.value))
    .x((d) => axes.find((a) => a.name === d.axis)!.x)
    .y((d) => scales.get(d.axis)!(d.value as number));

  const lineLayer = svg.append('g').attr('class', 'pcp-lines');
  for (const trial of trials) {
    const points = axes.map(({ name, isParam }) => ({
      axis: name,
      value: isParam ? trial.config[name] : trial.metrics[name],
    }));
    const dimmed = !passesBrushes(trial, state.brushes);
    lineLayer
      .append('path')
      .attr('class', dimmed ? 'pcp-line dimmed' : 'pcp-line')
      .attr('data-trial', trial.id)
      .attr('d', line(points))
      .append('title')
      .text(trial.id);
  }

  const axisLayer = svg.append('g').attr('class', 'pcp-axes');
  for (const { name, x, isParam } of axes) {
    const scale = scales.get(name)!;
    const g = axisLayer
      .append('g')
      .attr('class', isParam ? 'pcp-axis param-axis' : 'pcp-axis metric-axis')
      .attr('data-axis', name)
      .attr('transform', `translate(${x},0)`);
    g.call(d3.axisLeft(scale).ticks(6) as never);
    g.append('text')
      .attr('class', 'pcp-axis-label')
      .attr('x', 0)
      .attr('y', MARGIN.top - 14)
      .attr('text-anchor', 'middle')
      .text(name);

    const brush = d3
      .brushY<unknown>()
      .extent([
        [x - AXIS_SPACING / 4, MARGIN.top],
        [x + AXIS_SPACING / 4, PLOT_HEIGHT - MARGIN.bottom],
      ])
      .on('end', (event: d3.D3BrushEvent<unknown>) => {
        if (!event.selection) {
          callbacks.onBrush(name, null);
          return;
        }
        const [y0, y1] = event.selection as [number, number];
        const a = scale.invert(y1);
        const b = scale.invert(y0);
        callbacks.onBrush(name, [Math.min(a, b), Math.max(a, b)]);
      });
    axisLayer
      .append('g')
      .attr('class', 'pcp-brush')
      .attr('data-axis', name)
      .call(brush as never);
  }

  if (trials.length === 0) {
    const empty = document.createElement('div');
    empty.className = 'pcp-empty';
    empty.textContent = 'No trials ingested yet. POST a trial log to /api/trials to begin.';
    container.appendChild(empty);
  }
}

/** One checkbox per hyperparameter axis and one radio per metric axis,
 * positioned over their axes. Checkboxes drive only the importance
 * selection; bounds always cover every dimension. */
function renderControls(
  container: HTMLElement,
  space: SpaceDoc,
  state: ViewState,
  callbacks: PcpCallbacks,
  axes: { name: string; x: number; isParam: boolean }[],
): void {
  const row = document.createElement('div');
  row.className = 'pcp-controls';
  row.style.position = 'relative';
  row.style.width = `${plotWidth(space)}px`;
  row.style.height = '26px';
  for (const { name, x, isParam } of axes) {
    const label = document.createElement('label');
    label.style.position = 'absolute';
    label.style.left = `${x - 10}px`;
    const input = document.createElement('input');
    if (isParam) {
      input.type = 'checkbox';
      input.className = 'param-select';
      input.checked = state.selectedParams.has(name);
      input.addEventListener('change', () => callbacks.onToggleParam(name));
    } else {
      input.type = 'radio';
      input.name = 'metric-select';
      input.className = 'metric-select';
      input.checked = state.selectedMetric === name;
      input.addEventListener('change', () => callbacks.onSelectMetric(name));
    }
    input.dataset.axis = name;
    label.appendChild(input);
    label.title = isParam ? `include ${name} in importance scores` : `analyze metric ${name}`;
    row.appendChild(label);
  }
  container.appendChild(row);
}

export function formatValue(v: number): string {
  if (v === 0) return '0';
  const magnitude = Math.abs(v);
  if (magnitude >= 1e4 || magnitude < 1e-3) return v.toExponential(2);
  return String(Number(v.toPrecision(5)));
}
