/**
 * Diverging colormap centered at zero for sign-symmetric Wigner data:
 * blue for negative, white at zero, red for positive.
 */

function channel(v: number): number {
  return Math.max(0, Math.min(255, Math.round(v)))
}

/** t in [-1, 1] -> css color */
export function diverging(t: number): string {
  const a = Math.max(-1, Math.min(1, t))
  let r: number
  let g: number
  let b: number
  if (a < 0) {
    // white -> blue
    r = 255 * (1 + a)
    g = 255 * (1 + 0.75 * a)
    b = 255 * (1 + 0.25 * a)
  } else {
    // white -> red
    r = 255 * (1 - 0.2 * a)
    g = 255 * (1 - 0.85 * a)
    b = 255 * (1 - 0.85 * a)
  }
  return `rgb(${channel(r)},${channel(g)},${channel(b)})`
}
