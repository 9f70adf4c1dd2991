/**
 * figkit command line:
 *   render --manifest PATH --figure {run_panels|wigner_panel} --out DIR
 */

import { ArtifactError, FigureKind, renderFigure } from './index.js'

function parseArgs(argv: string[]): { manifest: string; figure: FigureKind; out: string } {
  if (argv[0] !== 'render') {
    throw new ArtifactError(`unknown command ${argv[0] ?? '(none)'}; expected 'render'`)
  }
  const opts: Record<string, string> = {}
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i]
    const value = argv[i + 1]
    if (!key.startsWith('--') || value === undefined) {
      throw new ArtifactError(`bad argument ${key}`)
    }
    opts[key.slice(2)] = value
  }
  for (const required of ['manifest', 'figure', 'out']) {
    if (!(required in opts)) throw new ArtifactError(`missing --${required}`)
  }
  if (opts.figure !== 'run_panels' && opts.figure !== 'wigner_panel') {
    throw new ArtifactError(`unknown figure kind ${opts.figure}`)
  }
  return { manifest: opts.manifest, figure: opts.figure as FigureKind, out: opts.out }
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv)
    const written = renderFigure(args.manifest, args.figure, args.out)
    for (const path of written) console.log(path)
    return 0
  } catch (err) {
    if (err instanceof ArtifactError) {
      console.error(`error: ${err.message}`)
      return 2
    }
    throw err
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)))
}
