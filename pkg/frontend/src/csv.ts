/**
 * Parsers for the simulator's published artifact formats: trajectory CSV
 * (t,i_raw,i_filtered,purity,logical_phase), events CSV (t,kind,payload),
 * Wigner CSV (x,y,w row-major), summary JSON, and the manifest with
 * SHA-256 content hashes.
 */

import { createHash } from 'node:crypto'
import { readFileSync } from 'node:fs'
import { join } from 'node:path'

export interface TrajectorySeries {
  t: number[]
  iRaw: number[]
  iFiltered: number[]
  purity: number[]
  logicalPhase: number[]
}

export interface RunEvent {
  t: number
  kind: string
  payload: string
}

export interface WignerGrid {
  x: number[]
  y: number[]
  /** values[ix][iy], matching the row-major CSV layout */
  values: number[][]
}

export interface ManifestEntry {
  name: string
  sha256: string
  bytes: number
}

export interface Manifest {
  files: ManifestEntry[]
  config: Record<string, unknown>
}

export class ArtifactError extends Error {}

function splitLines(text: string): string[] {
  return text.split('\n').map((l) => l.trim()).filter((l) => l.length > 0)
}

export function parseTrajectoryCsv(text: string): TrajectorySeries {
  const lines = splitLines(text)
  if (lines[0] !== 't,i_raw,i_filtered,purity,logical_phase') {
    throw new ArtifactError(`unexpected trajectory header: ${lines[0]}`)
  }
  const out: TrajectorySeries = { t: [], iRaw: [], iFiltered: [], purity: [], logicalPhase: [] }
  for (const line of lines.slice(1)) {
    const cols = line.split(',').map(Number)
    if (cols.length !== 5) throw new ArtifactError(`bad trajectory row: ${line}`)
    out.t.push(cols[0])
    out.iRaw.push(cols[1])
    out.iFiltered.push(cols[2])
    out.purity.push(cols[3])
    out.logicalPhase.push(cols[4])
  }
  return out
}

export function parseEventsCsv(text: string): RunEvent[] {
  const lines = splitLines(text)
  if (lines[0] !== 't,kind,payload') {
    throw new ArtifactError(`unexpected events header: ${lines[0]}`)
  }
  return lines.slice(1).map((line) => {
    const first = line.indexOf(',')
    const second = line.indexOf(',', first + 1)
    if (first < 0 || second < 0) throw new ArtifactError(`bad event row: ${line}`)
    return {
      t: Number(line.slice(0, first)),
      kind: line.slice(first + 1, second),
      payload: line.slice(second + 1),
    }
  })
}

export function parseWignerCsv(text: string): WignerGrid {
  const lines = splitLines(text)
  if (lines[0] !== 'x,y,w') throw new ArtifactError(`unexpected wigner header: ${lines[0]}`)
  const xs: number[] = []
  const ys: number[] = []
  const triples: Array<[number, number, number]> = []
  for (const line of lines.slice(1)) {
    const cols = line.split(',').map(Number)
    if (cols.length !== 3) throw new ArtifactError(`bad wigner row: ${line}`)
    triples.push([cols[0], cols[1], cols[2]])
    if (xs.length === 0 || cols[0] !== xs[xs.length - 1]) xs.push(cols[0])
  }
  const ny = triples.length / xs.length
  if (!Number.isInteger(ny)) throw new ArtifactError('wigner grid is not rectangular')
  for (let j = 0; j < ny; j++) ys.push(triples[j][1])
  const values: number[][] = []
  for (let i = 0; i < xs.length; i++) {
    values.push(triples.slice(i * ny, (i + 1) * ny).map((t) => t[2]))
  }
  return { x: xs, y: ys, values }
}

export function sha256Of(path: string): string {
  return createHash('sha256').update(readFileSync(path)).digest('hex')
}

export function loadManifest(path: string): Manifest {
  const raw = JSON.parse(readFileSync(path, 'utf-8'))
  if (!Array.isArray(raw.files)) throw new ArtifactError('manifest lacks a files list')
  return raw as Manifest
}

/** Every artifact named by the manifest must exist and hash-match. */
export function verifyManifest(dir: string, manifest: Manifest): void {
  for (const entry of manifest.files) {
    let digest: string
    try {
      digest = sha256Of(join(dir, entry.name))
    } catch (err) {
      throw new ArtifactError(`missing artifact ${entry.name}`)
    }
    if (digest !== entry.sha256) {
      throw new ArtifactError(`hash mismatch for ${entry.name}`)
    }
  }
}
