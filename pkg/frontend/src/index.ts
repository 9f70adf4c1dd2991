export {
  ArtifactError,
  parseEventsCsv,
  parseTrajectoryCsv,
  parseWignerCsv,
  loadManifest,
  verifyManifest,
  sha256Of,
} from './csv.js'
export type { Manifest, RunEvent, TrajectorySeries, WignerGrid } from './csv.js'
export { renderRunPanels } from './panels.js'
export type { Thresholds } from './panels.js'
export { renderWignerPanels } from './wigner.js'
export type { LabeledGrid } from './wigner.js'
export { renderFigure } from './render.js'
export type { FigureKind } from './render.js'
export { isoSegments } from './contour.js'
export { linearScale, extent, ticks } from './scale.js'
export { diverging } from './colormap.js'
