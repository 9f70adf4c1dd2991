/**
 * Marching-squares iso-line extraction on a rectangular grid.
 * Returns line segments in data coordinates; rendering joins them as-is
 * (no path merging needed for stroke-only contours).
 */

export interface Segment {
  x1: number
  y1: number
  x2: number
  y2: number
}

function lerp(a: number, b: number, va: number, vb: number, level: number): number {
  const denom = vb - va
  if (denom === 0) return a
  return a + ((level - va) / denom) * (b - a)
}

export function isoSegments(
  x: number[],
  y: number[],
  values: number[][],
  level: number,
): Segment[] {
  const segs: Segment[] = []
  for (let i = 0; i < x.length - 1; i++) {
    for (let j = 0; j < y.length - 1; j++) {
      const v00 = values[i][j]
      const v10 = values[i + 1][j]
      const v11 = values[i + 1][j + 1]
      const v01 = values[i][j + 1]
      let code = 0
      if (v00 > level) code |= 1
      if (v10 > level) code |= 2
      if (v11 > level) code |= 4
      if (v01 > level) code |= 8
      if (code === 0 || code === 15) continue

      const bottom = (): [number, number] => [lerp(x[i], x[i + 1], v00, v10, level), y[j]]
      const right = (): [number, number] => [x[i + 1], lerp(y[j], y[j + 1], v10, v11, level)]
      const top = (): [number, number] => [lerp(x[i], x[i + 1], v01, v11, level), y[j + 1]]
      const left = (): [number, number] => [x[i], lerp(y[j], y[j + 1], v00, v01, level)]

      const push = (p: [number, number], q: [number, number]) =>
        segs.push({ x1: p[0], y1: p[1], x2: q[0], y2: q[1] })

      switch (code) {
        case 1: case 14: push(left(), bottom()); break
        case 2: case 13: push(bottom(), right()); break
        case 3: case 12: push(left(), right()); break
        case 4: case 11: push(right(), top()); break
        case 6: case 9: push(bottom(), top()); break
        case 7: case 8: push(left(), top()); break
        case 5:
          push(left(), bottom())
          push(right(), top())
          break
        case 10:
          push(bottom(), right())
          push(left(), top())
          break
      }
    }
  }
  return segs
}
