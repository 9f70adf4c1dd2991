/**
 * Wigner contour panels: a shared-axes grid of phase-space heatmaps with
 * zero contours, one panel per resonator steady state or movie snapshot.
 * The diverging colormap is centered at zero and shared across panels so
 * negative quasi-probability stands out.
 */

import { diverging } from './colormap.js'
import { isoSegments } from './contour.js'
import { WignerGrid } from './csv.js'
import { linearScale } from './scale.js'
import { el, fmt, svgDocument, text } from './svg.js'

const CELL = 220
const GAP = 46
const MARGIN = { left: 64, top: 40 }

export interface LabeledGrid {
  label: string
  grid: WignerGrid
}

function heatmap(grid: WignerGrid, wMax: number, x0: number, y0: number): string[] {
  const nx = grid.x.length
  const ny = grid.y.length
  const sx = linearScale([grid.x[0], grid.x[nx - 1]], [x0, x0 + CELL])
  const sy = linearScale([grid.y[0], grid.y[ny - 1]], [y0 + CELL, y0])
  const cells: string[] = []
  const dx = CELL / (nx - 1)
  const dy = CELL / (ny - 1)
  for (let i = 0; i < nx - 1; i++) {
    for (let j = 0; j < ny - 1; j++) {
      const v = (grid.values[i][j] + grid.values[i + 1][j]
        + grid.values[i][j + 1] + grid.values[i + 1][j + 1]) / 4
      if (Math.abs(v) < wMax * 5e-3) continue
      cells.push(el('rect', {
        x: sx(grid.x[i]),
        y: sy(grid.y[j + 1]),
        width: dx + 0.5,
        height: dy + 0.5,
        fill: diverging(v / wMax),
        stroke: 'none',
      }))
    }
  }
  // zero contour plus two filled-level outlines per sign
  for (const level of [-0.5 * wMax, -0.1 * wMax, 0.1 * wMax, 0.5 * wMax]) {
    const segs = isoSegments(grid.x, grid.y, grid.values, level)
    for (const s of segs) {
      cells.push(el('line', {
        x1: sx(s.x1), y1: sy(s.y1), x2: sx(s.x2), y2: sy(s.y2),
        stroke: level < 0 ? '#27408b' : '#8b1a1a',
        'stroke-width': 0.8,
        class: 'contour',
      }))
    }
  }
  return cells
}

export function renderWignerPanels(grids: LabeledGrid[]): string {
  const cols = Math.min(2, grids.length)
  const rows = Math.ceil(grids.length / cols)
  const wMax = Math.max(
    ...grids.map((g) => Math.max(...g.grid.values.map((row) => Math.max(...row.map(Math.abs))))),
  )
  const children: string[] = []
  grids.forEach((entry, idx) => {
    const col = idx % cols
    const row = Math.floor(idx / cols)
    const x0 = MARGIN.left + col * (CELL + GAP)
    const y0 = MARGIN.top + row * (CELL + GAP)
    children.push(...heatmap(entry.grid, wMax, x0, y0))
    children.push(el('rect', {
      x: x0, y: y0, width: CELL, height: CELL, fill: 'none', stroke: '#222222',
    }))
    children.push(text(x0 + 4, y0 - 6, entry.label, { 'font-size': 12 }))
    const g = entry.grid
    children.push(text(x0 - 40, y0 + CELL / 2, 'Im', { 'font-size': 11 }))
    children.push(text(x0 + CELL / 2 - 8, y0 + CELL + 16, 'Re', { 'font-size': 11 }))
    children.push(text(x0 - 6, y0 + CELL + 4, fmt(g.y[0]).replace(/\.?0+$/, ''),
      { 'font-size': 9 }))
    children.push(text(x0 + CELL - 12, y0 + CELL + 16, fmt(g.x[g.x.length - 1]).replace(/\.?0+$/, ''),
      { 'font-size': 9 }))
  })
  const width = MARGIN.left + cols * (CELL + GAP)
  const height = MARGIN.top + rows * (CELL + GAP) + 10
  return svgDocument(width, height, children)
}
