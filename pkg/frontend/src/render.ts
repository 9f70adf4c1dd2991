/**
 * Manifest-driven figure rendering. The manifest is the contract: every
 * referenced artifact must exist and hash-match before anything is drawn.
 */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs'
import { basename, dirname, join } from 'node:path'

import {
  ArtifactError,
  Manifest,
  loadManifest,
  parseEventsCsv,
  parseTrajectoryCsv,
  parseWignerCsv,
  verifyManifest,
} from './csv.js'
import { Thresholds, renderRunPanels } from './panels.js'
import { LabeledGrid, renderWignerPanels } from './wigner.js'

export type FigureKind = 'run_panels' | 'wigner_panel'

interface Summary {
  thresholds?: { upper: number; lower: number }
  [key: string]: unknown
}

function artifactNames(manifest: Manifest): string[] {
  return manifest.files.map((f) => f.name)
}

export function renderFigure(manifestPath: string, figure: FigureKind, outDir: string): string[] {
  const dir = dirname(manifestPath)
  const manifest = loadManifest(manifestPath)
  verifyManifest(dir, manifest)
  mkdirSync(outDir, { recursive: true })
  const names = artifactNames(manifest)
  const written: string[] = []

  if (figure === 'run_panels') {
    const summary: Summary = JSON.parse(readFileSync(join(dir, 'summary.json'), 'utf-8'))
    const thresholds = summary.thresholds
    if (!thresholds) {
      throw new ArtifactError('summary.json carries no detection thresholds; '
        + 'run_panels needs a QEC-run artifact set')
    }
    const trajNames = names.filter((n) => /^trajectory_\d+\.csv$/.test(n)).sort()
    if (trajNames.length === 0) throw new ArtifactError('no trajectory CSVs in manifest')
    for (const name of trajNames) {
      const traj = parseTrajectoryCsv(readFileSync(join(dir, name), 'utf-8'))
      const evName = name.replace('trajectory', 'events')
      const events = names.includes(evName)
        ? parseEventsCsv(readFileSync(join(dir, evName), 'utf-8'))
        : []
      const svg = renderRunPanels(traj, events, thresholds as Thresholds)
      const out = join(outDir, name.replace('.csv', '_panels.svg'))
      writeFileSync(out, svg)
      written.push(out)
    }
    return written
  }

  if (figure === 'wigner_panel') {
    const wigNames = names.filter((n) => /^wigner_.*\.csv$/.test(n)).sort()
    if (wigNames.length === 0) throw new ArtifactError('no Wigner CSVs in manifest')
    const grids: LabeledGrid[] = wigNames.map((name) => ({
      label: basename(name, '.csv').replace('wigner_', ''),
      grid: parseWignerCsv(readFileSync(join(dir, name), 'utf-8')),
    }))
    const svg = renderWignerPanels(grids)
    const out = join(outDir, 'wigner_panel.svg')
    writeFileSync(out, svg)
    written.push(out)
    return written
  }

  throw new ArtifactError(`unknown figure kind ${figure}`)
}
