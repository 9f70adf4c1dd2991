/** Linear data-to-pixel scales and round-number tick generation. */

export interface Scale {
  (v: number): number
  domain: [number, number]
  range: [number, number]
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain
  const [r0, r1] = range
  const span = d1 - d0 || 1
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale
  fn.domain = domain
  fn.range = range
  return fn
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity
  let hi = -Infinity
  for (const v of values) {
    if (!Number.isFinite(v)) continue
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  if (lo > hi) return [0, 1]
  if (lo === hi) return [lo - 1, hi + 1]
  return [lo, hi]
}

export function padded(domain: [number, number], frac = 0.08): [number, number] {
  const pad = (domain[1] - domain[0]) * frac
  return [domain[0] - pad, domain[1] + pad]
}

/** Round tick positions at a 1/2/5 step covering the domain. */
export function ticks(domain: [number, number], target = 5): number[] {
  const span = domain[1] - domain[0]
  if (span <= 0) return [domain[0]]
  const raw = span / target
  const mag = Math.pow(10, Math.floor(Math.log10(raw)))
  let step = mag
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) {
      step = m * mag
      break
    }
  }
  const out: number[] = []
  const start = Math.ceil(domain[0] / step) * step
  for (let v = start; v <= domain[1] + 1e-12; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v)
  }
  return out
}
