/**
 * Three stacked run panels: filtered photocurrent with detection thresholds,
 * logical purity, and logical phase, with vertical markers at controller
 * events. Layout and styling are fixed so identical inputs give identical
 * bytes.
 */

import { RunEvent, TrajectorySeries } from './csv.js'
import { Scale, extent, linearScale, padded, ticks } from './scale.js'
import { el, fmt, svgDocument, text } from './svg.js'

export interface Thresholds {
  upper: number
  lower: number
}

const WIDTH = 720
const PANEL_H = 180
const MARGIN = { left: 64, right: 16, top: 28, gap: 24, bottom: 44 }

function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale, stroke: string): string {
  const pts: string[] = []
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(ys[i])) continue
    pts.push(`${fmt(sx(xs[i]))},${fmt(sy(ys[i]))}`)
  }
  return el('polyline', {
    points: pts.join(' '),
    fill: 'none',
    stroke,
    'stroke-width': 1.2,
  })
}

function axes(sx: Scale, sy: Scale, x0: number, y0: number, w: number, h: number,
              yLabel: string, withXLabel: boolean): string[] {
  const parts: string[] = [
    el('rect', { x: x0, y: y0, width: w, height: h, fill: 'none', stroke: '#222222' }),
  ]
  for (const tx of ticks(sx.domain)) {
    const px = sx(tx)
    parts.push(el('line', { x1: px, y1: y0 + h, x2: px, y2: y0 + h + 4, stroke: '#222222' }))
    if (withXLabel) {
      parts.push(text(px - 8, y0 + h + 16, fmt(tx).replace(/\.?0+$/, '')))
    }
  }
  for (const ty of ticks(sy.domain, 4)) {
    const py = sy(ty)
    parts.push(el('line', { x1: x0 - 4, y1: py, x2: x0, y2: py, stroke: '#222222' }))
    parts.push(text(x0 - 48, py + 4, fmt(ty).replace(/\.?0+$/, '')))
  }
  parts.push(
    text(x0 - 52, y0 - 8, yLabel, { 'font-size': 12 }),
  )
  if (withXLabel) parts.push(text(x0 + w / 2 - 20, y0 + h + 34, 't (us)', { 'font-size': 12 }))
  return parts
}

function eventMarkers(events: RunEvent[], sx: Scale, y0: number, h: number): string[] {
  const out: string[] = []
  for (const ev of events) {
    if (ev.kind !== 'detection' && ev.kind !== 'scheduled_flip') continue
    const color = ev.kind === 'detection' ? '#d95f02' : '#7570b3'
    out.push(
      el('line', {
        x1: sx(ev.t), y1: y0, x2: sx(ev.t), y2: y0 + h,
        stroke: color, 'stroke-dasharray': '3,3', 'stroke-width': 1,
        class: `event-${ev.kind}`, 'data-t': fmt(ev.t),
      }),
    )
  }
  return out
}

export function renderRunPanels(
  traj: TrajectorySeries,
  events: RunEvent[],
  thresholds: Thresholds,
): string {
  const x0 = MARGIN.left
  const w = WIDTH - MARGIN.left - MARGIN.right
  const sx = linearScale(extent(traj.t), [x0, x0 + w])
  const children: string[] = []

  const panels: Array<{
    label: string
    series: number[]
    fixedDomain?: [number, number]
    decorate?: (sy: Scale, y0: number) => string[]
  }> = [
    {
      label: 'I_int',
      series: traj.iFiltered,
      decorate: (sy) => [
        thresholdLine(sy, sx, thresholds.upper),
        thresholdLine(sy, sx, thresholds.lower),
      ],
    },
    { label: 'purity', series: traj.purity, fixedDomain: [0.4, 1.02] },
    { label: 'phase (rad)', series: traj.logicalPhase },
  ]

  let yTop = MARGIN.top
  panels.forEach((panel, idx) => {
    const last = idx === panels.length - 1
    let domain = panel.fixedDomain ?? padded(extent(panel.series))
    if (panel.label === 'I_int') {
      domain = padded([
        Math.min(domain[0], thresholds.lower - 0.3),
        Math.max(domain[1], 0.3),
      ], 0.04)
    }
    const sy = linearScale([domain[1], domain[0]], [yTop, yTop + PANEL_H])
    children.push(...axes(sx, sy, x0, yTop, w, PANEL_H, panel.label, last))
    children.push(...eventMarkers(events, sx, yTop, PANEL_H))
    if (panel.decorate) children.push(...panel.decorate(sy, yTop))
    children.push(polyline(traj.t, panel.series, sx, sy, idx === 0 ? '#1b6ca8' : '#333333'))
    yTop += PANEL_H + MARGIN.gap
  })

  const height = yTop - MARGIN.gap + MARGIN.bottom
  return svgDocument(WIDTH, height, children)
}

function thresholdLine(sy: Scale, sx: Scale, value: number): string {
  return el('line', {
    x1: sx.range[0], y1: sy(value), x2: sx.range[1], y2: sy(value),
    stroke: '#777777', 'stroke-dasharray': '5,4', 'stroke-width': 1,
    class: 'threshold-line', 'data-value': fmt(value),
  })
}
