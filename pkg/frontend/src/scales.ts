import * as d3 from 'd3';

import type { ParamDoc, SpaceDoc, TrialRecord } from './types';

export const MARGIN = { top: 64, right: 48, bottom: 28, left: 48 } as const;
export const AXIS_SPACING = 110;
export const METRIC_GUTTER = 48; // visual gap between the param and metric blocks
export const PLOT_HEIGHT = 420;
export const BAND_WIDTH = 14;

export type AxisScale =
  | d3.ScaleLinear<number, number>
  | d3.ScaleLogarithmic<number, number>;

/** Vertical scale for one hyperparameter axis. Log axes follow the
 * display_scale hint (rendering only; the engine never sees transformed
 * values). Clamped so out-of-range observations pin to the axis ends. */
export function paramScale(param: ParamDoc, height = PLOT_HEIGHT): AxisScale {
  const range: [number, number] = [height - MARGIN.bottom, MARGIN.top];
  if (param.display_scale === 'log' && param.lower > 0) {
    return d3.scaleLog().domain([param.lower, param.upper]).range(range).clamp(true);
  }
  return d3.scaleLinear().domain([param.lower, param.upper]).range(range).clamp(true);
}

/** Vertical scale for a metric axis: domain from the observed values. */
export function metricScale(
  metric: string,
  trials: TrialRecord[],
  height = PLOT_HEIGHT,
): AxisScale {
  const values = trials
    .map((t) => t.metrics[metric])
    .filter((v): v is number => v !== undefined && Number.isFinite(v));
  let lo = values.length ? Math.min(...values) : 0;
  let hi = values.length ? Math.max(...values) : 1;
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * 0.05;
  return d3
    .scaleLinear()
    .domain([lo - pad, hi + pad])
    .range([height - MARGIN.bottom, MARGIN.top])
    .clamp(true);
}

/** Axis order: hyperparameters on the left (canonical order), metrics on
 * the right, with x positions for each. */
export function axisLayout(space: SpaceDoc): { name: string; x: number; isParam: boolean }[] {
  const axes: { name: string; x: number; isParam: boolean }[] = [];
  let x = MARGIN.left;
  for (const p of space.params) {
    axes.push({ name: p.name, x, isParam: true });
    x += AXIS_SPACING;
  }
  x += METRIC_GUTTER;
  for (const m of space.metrics) {
    axes.push({ name: m.name, x, isParam: false });
    x += AXIS_SPACING;
  }
  return axes;
}

export function plotWidth(space: SpaceDoc): number {
  const last = axisLayout(space).at(-1);
  return (last ? last.x : MARGIN.left) + MARGIN.right;
}
