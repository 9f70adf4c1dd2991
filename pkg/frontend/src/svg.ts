/** Minimal deterministic SVG string builder. */

export type Attrs = Record<string, string | number>

/** Fixed-precision formatting keeps output byte-stable across runs. */
export function fmt(v: number): string {
  if (!Number.isFinite(v)) return '0'
  const s = v.toFixed(3)
  return s === '-0.000' ? '0.000' : s
}

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const parts = Object.entries(attrs).map(
    ([k, v]) => `${k}="${typeof v === 'number' ? fmt(v) : v}"`,
  )
  const open = `<${tag}${parts.length ? ' ' + parts.join(' ') : ''}`
  if (children.length === 0) return `${open}/>`
  return `${open}>${children.join('')}</${tag}>`
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el('text', { x, y, 'font-family': 'monospace', 'font-size': 11, ...attrs }, [content])
}

export function svgDocument(width: number, height: number, children: string[]): string {
  return [
    '<?xml version="1.0" encoding="UTF-8"?>',
    el(
      'svg',
      { xmlns: 'http://www.w3.org/2000/svg', width, height, viewBox: `0 0 ${width} ${height}` },
      [el('rect', { x: 0, y: 0, width, height, fill: '#ffffff' }), ...children],
    ),
    '',
  ].join('\n')
}
