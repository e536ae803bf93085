import type { Figure, Shape } from './shapes.js'

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString()
}

function shapeSvg(s: Shape): string {
  switch (s.kind) {
    case 'rect':
      return `<rect x="${fmt(s.x)}" y="${fmt(s.y)}" width="${fmt(s.w)}" height="${fmt(s.h)}" fill="${s.fill}"/>`
    case 'line': {
      const dash = s.dash ? ` stroke-dasharray="${s.dash.join(' ')}"` : ''
      return `<line x1="${fmt(s.x1)}" y1="${fmt(s.y1)}" x2="${fmt(s.x2)}" y2="${fmt(s.y2)}" stroke="${s.stroke}" stroke-width="${s.width}"${dash}/>`
    }
    case 'polyline': {
      const pts = s.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ')
      const dash = s.dash ? ` stroke-dasharray="${s.dash.join(' ')}"` : ''
      return `<polyline points="${pts}" fill="none" stroke="${s.stroke}" stroke-width="${s.width}"${dash}/>`
    }
    case 'circle':
      return `<circle cx="${fmt(s.cx)}" cy="${fmt(s.cy)}" r="${fmt(s.r)}" fill="${s.fill}"/>`
    case 'text':
      return `<text x="${fmt(s.x)}" y="${fmt(s.y)}" font-family="monospace" font-size="${s.size}" fill="${s.fill}">${esc(s.text)}</text>`
  }
}

export function toSvg(fig: Figure): string {
  const body = fig.shapes.map(shapeSvg).join('\n  ')
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${fig.width}" height="${fig.height}" viewBox="0 0 ${fig.width} ${fig.height}">\n  ${body}\n</svg>\n`
}
