import { readFileSync, writeFileSync, mkdtempSync, cpSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'
import { describe, expect, it } from 'vitest'

import {
  ArtifactError,
  isoSegments,
  linearScale,
  parseEventsCsv,
  parseTrajectoryCsv,
  parseWignerCsv,
  renderFigure,
  ticks,
} from '../src/index.js'
import { main } from '../src/cli.js'

const FIG2 = join(__dirname, 'fixtures', 'fig2_odd')
const FIG1B = join(__dirname, 'fixtures', 'fig1b')

function tmp(): string {
  return mkdtempSync(join(tmpdir(), 'figkit-'))
}

describe('csv parsing', () => {
  it('parses a trajectory file', () => {
    const traj = parseTrajectoryCsv(readFileSync(join(FIG2, 'trajectory_000.csv'), 'utf-8'))
    expect(traj.t.length).toBeGreaterThan(50)
    expect(traj.t[0]).toBe(0)
    expect(traj.iFiltered.length).toBe(traj.t.length)
  })

  it('parses events with commas inside payloads', () => {
    const events = parseEventsCsv('t,kind,payload\n1.5,detection,odd->even;i=-0.25\n')
    expect(events).toHaveLength(1)
    expect(events[0].payload).toContain('i=-0.25')
  })

  it('parses a rectangular wigner grid', () => {
    const grid = parseWignerCsv(readFileSync(join(FIG1B, 'wigner_ss_01.csv'), 'utf-8'))
    expect(grid.x.length).toBe(61)
    expect(grid.y.length).toBe(61)
    expect(grid.values.length).toBe(61)
  })

  it('rejects a wrong header', () => {
    expect(() => parseTrajectoryCsv('a,b\n1,2\n')).toThrow(ArtifactError)
  })
})

describe('scales and contours', () => {
  it('maps linearly', () => {
    const s = linearScale([0, 10], [100, 200])
    expect(s(5)).toBe(150)
  })

  it('produces round ticks', () => {
    expect(ticks([0, 10], 5)).toContain(0)
    expect(ticks([0, 10], 5)).toContain(10)
  })

  it('extracts a circle-ish zero contour', () => {
    const n = 21
    const axis = Array.from({ length: n }, (_, i) => -2 + (4 * i) / (n - 1))
    const values = axis.map((x) => axis.map((y) => 1 - x * x - y * y))
    const segs = isoSegments(axis, axis, values, 0)
    expect(segs.length).toBeGreaterThan(8)
    for (const s of segs) {
      const r = Math.hypot(s.x1, s.y1)
      expect(Math.abs(r - 1)).toBeLessThan(0.25)
    }
  })
})

describe('run panels figure', () => {
  it('renders with threshold lines at -0.28 and -2.52', () => {
    const out = tmp()
    const files = renderFigure(join(FIG2, 'manifest.json'), 'run_panels', out)
    expect(files).toHaveLength(1)
    const svg = readFileSync(files[0], 'utf-8')
    expect(svg).toContain('class="threshold-line" data-value="-0.280"')
    expect(svg).toContain('class="threshold-line" data-value="-2.520"')
  })

  it('is byte-deterministic across two runs', () => {
    const a = renderFigure(join(FIG2, 'manifest.json'), 'run_panels', tmp())
    const b = renderFigure(join(FIG2, 'manifest.json'), 'run_panels', tmp())
    expect(readFileSync(a[0])).toEqual(readFileSync(b[0]))
  })

  it('marks detections when present', () => {
    const events = parseEventsCsv(readFileSync(join(FIG2, 'events_000.csv'), 'utf-8'))
    const svg = readFileSync(
      renderFigure(join(FIG2, 'manifest.json'), 'run_panels', tmp())[0], 'utf-8')
    const markers = svg.match(/class="event-detection"/g) ?? []
    // three stacked panels -> one marker per panel per detection
    expect(markers.length).toBe(3 * events.filter((e) => e.kind === 'detection').length)
  })
})

describe('wigner panel figure', () => {
  it('renders the four steady states into one 2x2 panel', () => {
    const files = renderFigure(join(FIG1B, 'manifest.json'), 'wigner_panel', tmp())
    expect(files).toHaveLength(1)
    const svg = readFileSync(files[0], 'utf-8')
    for (const sector of ['ss_00', 'ss_01', 'ss_10', 'ss_11']) {
      expect(svg).toContain(`>${sector}<`)
    }
    expect(svg).toContain('class="contour"')
  })

  it('is byte-deterministic', () => {
    const a = renderFigure(join(FIG1B, 'manifest.json'), 'wigner_panel', tmp())
    const b = renderFigure(join(FIG1B, 'manifest.json'), 'wigner_panel', tmp())
    expect(readFileSync(a[0])).toEqual(readFileSync(b[0]))
  })
})

describe('manifest integrity', () => {
  it('rejects a tampered artifact', () => {
    const dir = tmp()
    cpSync(FIG2, dir, { recursive: true })
    const target = join(dir, 'trajectory_000.csv')
    writeFileSync(target, readFileSync(target, 'utf-8') + '9.9,0,0,1,0\n')
    expect(() => renderFigure(join(dir, 'manifest.json'), 'run_panels', tmp()))
      .toThrow(/hash mismatch/)
  })

  it('cli reports missing artifacts with a nonzero exit', () => {
    const dir = tmp()
    cpSync(FIG2, dir, { recursive: true })
    writeFileSync(join(dir, 'events_000.csv'), '')  // size/hash now wrong
    const rc = main(['render', '--manifest', join(dir, 'manifest.json'),
                     '--figure', 'run_panels', '--out', tmp()])
    expect(rc).toBe(2)
  })

  it('cli renders the fixture set end to end', () => {
    const out = tmp()
    const rc = main(['render', '--manifest', join(FIG2, 'manifest.json'),
                     '--figure', 'run_panels', '--out', out])
    expect(rc).toBe(0)
  })
})
