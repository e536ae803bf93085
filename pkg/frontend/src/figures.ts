import { column, textColumn, CsvError, type Table } from './csv.js'
import { extent, linearScale, ticks, type Figure, type Shape } from './shapes.js'

const W = 860
const H = 520
const MARGIN = { left: 64, right: 16, top: 40, bottom: 44 }

function frame(shapes: Shape[], xs: ReturnType<typeof linearScale>, ys: ReturnType<typeof linearScale>, xlabel: string, ylabel: string) {
  shapes.push({ kind: 'rect', x: 0, y: 0, w: W, h: H, fill: 'white' })
  const x0 = MARGIN.left
  const x1 = W - MARGIN.right
  const y0 = H - MARGIN.bottom
  const y1 = MARGIN.top
  for (const tx of ticks(xs.domain[0], xs.domain[1])) {
    const px = xs(tx)
    shapes.push({ kind: 'line', x1: px, y1: y0, x2: px, y2: y1, stroke: '#ccc', width: 1 })
    shapes.push({ kind: 'text', x: px - 10, y: y0 + 16, text: fmtTick(tx), fill: '#444', size: 10 })
  }
  for (const ty of ticks(ys.domain[0], ys.domain[1])) {
    const py = ys(ty)
    shapes.push({ kind: 'line', x1: x0, y1: py, x2: x1, y2: py, stroke: '#ccc', width: 1 })
    shapes.push({ kind: 'text', x: 8, y: py + 3, text: fmtTick(ty), fill: '#444', size: 10 })
  }
  shapes.push({ kind: 'line', x1: x0, y1: y0, x2: x1, y2: y0, stroke: 'black', width: 1 })
  shapes.push({ kind: 'line', x1: x0, y1: y0, x2: x0, y2: y1, stroke: 'black', width: 1 })
  shapes.push({ kind: 'text', x: (x0 + x1) / 2 - 3 * xlabel.length, y: H - 8, text: xlabel, fill: 'black', size: 11 })
  shapes.push({ kind: 'text', x: 8, y: MARGIN.top - 18, text: ylabel, fill: 'black', size: 11 })
}

function fmtTick(v: number): string {
  return Math.abs(v) >= 1000 ? v.toFixed(0) : Number(v.toPrecision(4)).toString()
}

export function deviationOf(table: Table): number {
  const f = column(table, 'f_brute')
  const lam = column(table, 'lambda')
  let dev = 0
  for (let i = 0; i < f.length; i++) dev = Math.max(dev, Math.abs(f[i] - lam[i]))
  return dev
}

export function formatDeviation(dev: number): string {
  return dev.toFixed(6)
}

/** Overlay of the sampled profile and the piecewise-linear model, with
 *  markers at the model's local peaks/valleys and the sup-deviation
 *  annotation computed from the same rows. */
export function profileFigure(table: Table): Figure {
  const t = column(table, 't')
  const f = column(table, 'f_brute')
  const lam = column(table, 'lambda')
  for (let i = 1; i < t.length; i++) {
    if (t[i] <= t[i - 1]) throw new CsvError('t not strictly increasing', i + 2)
  }
  const xs = linearScale(extent(t, 0.02), [MARGIN.left, W - MARGIN.right])
  const ys = linearScale(extent([...f, ...lam]), [H - MARGIN.bottom, MARGIN.top])
  const shapes: Shape[] = []
  frame(shapes, xs, ys, 't', '-log shortest^2')
  shapes.push({
    kind: 'polyline',
    points: t.map((v, i) => [xs(v), ys(f[i])] as [number, number]),
    stroke: '#1f77b4',
    width: 2,
  })
  shapes.push({
    kind: 'polyline',
    points: t.map((v, i) => [xs(v), ys(lam[i])] as [number, number]),
    stroke: '#d62728',
    width: 2,
    dash: [6, 4],
  })
  for (let i = 1; i + 1 < lam.length; i++) {
    const peak = lam[i] > lam[i - 1] && lam[i] >= lam[i + 1]
    const valley = lam[i] < lam[i - 1] && lam[i] <= lam[i + 1]
    if (peak || valley) {
      shapes.push({ kind: 'circle', cx: xs(t[i]), cy: ys(lam[i]), r: 4, fill: peak ? '#d62728' : '#2ca02c' })
    }
  }
  const dev = deviationOf(table)
  shapes.push({
    kind: 'text',
    x: MARGIN.left + 8,
    y: MARGIN.top - 4,
    text: `sampled profile (solid) vs model (dashed)  sup dev = ${formatDeviation(dev)}`,
    fill: 'black',
    size: 12,
  })
  return { width: W, height: H, shapes }
}

export type RateKind = 'chain' | 'slow'

export function detectRateKind(table: Table): RateKind {
  if (table.header.includes('T') && table.header.includes('M')) return 'chain'
  if (table.header.includes('r_of_t')) return 'slow'
  throw new CsvError('not a chain or slow-run CSV', 1)
}

/** Rate diagnostics: log-peak scatter with the 1 - 1/e0 reference slope for
 *  chain CSVs, or the m-vs-target band for slow-run CSVs. */
export function rateFigure(table: Table, e0 = 4): Figure {
  const kind = detectRateKind(table)
  const shapes: Shape[] = []
  if (kind === 'chain') {
    const T = column(table, 'T')
    const M = column(table, 'M')
    const lt = T.map(Math.log)
    const lm = M.map(Math.log)
    const xs = linearScale(extent([0, ...lt]), [MARGIN.left, W - MARGIN.right])
    const ys = linearScale(extent([0, ...lm]), [H - MARGIN.bottom, MARGIN.top])
    frame(shapes, xs, ys, 'log T', 'log M')
    const slope = 1 - 1 / (e0 + 1)
    const xHi = xs.domain[1]
    shapes.push({
      kind: 'line',
      x1: xs(0), y1: ys(0), x2: xs(xHi), y2: ys(slope * xHi),
      stroke: '#888', width: 1, dash: [4, 4],
    })
    lt.forEach((x, i) => shapes.push({ kind: 'circle', cx: xs(x), cy: ys(lm[i]), r: 4, fill: '#1f77b4' }))
    const below = lt.filter((x, i) => lm[i] <= slope * x).length
    shapes.push({
      kind: 'text', x: MARGIN.left + 8, y: MARGIN.top - 4,
      text: `log-peak scatter, reference slope ${slope.toFixed(4)}: ${below}/${lt.length} at or below`,
      fill: 'black', size: 12,
    })
  } else {
    const t = column(table, 't')
    const m = column(table, 'm')
    const r = column(table, 'r_of_t')
    const log2 = Math.log(2)
    const xs = linearScale(extent(t, 0.02), [MARGIN.left, W - MARGIN.right])
    const ys = linearScale(extent([...m, ...r.map((v) => v + log2), ...r.map((v) => v - log2)]),
                           [H - MARGIN.bottom, MARGIN.top])
    frame(shapes, xs, ys, 't', 'm')
    shapes.push({
      kind: 'polyline',
      points: t.map((v, i) => [xs(v), ys(r[i] + log2)] as [number, number]),
      stroke: '#888', width: 1, dash: [4, 4],
    })
    shapes.push({
      kind: 'polyline',
      points: t.map((v, i) => [xs(v), ys(Math.max(r[i] - log2, ys.domain[0]))] as [number, number]),
      stroke: '#888', width: 1, dash: [4, 4],
    })
    t.forEach((v, i) => shapes.push({ kind: 'circle', cx: xs(v), cy: ys(m[i]), r: 3, fill: '#ff7f0e' }))
    const inside = m.filter((v, i) => Math.abs(v - r[i]) <= log2).length
    shapes.push({
      kind: 'text', x: MARGIN.left + 8, y: MARGIN.top - 4,
      text: `valley values vs target band r(t) +- log2: ${inside}/${m.length} inside`,
      fill: 'black', size: 12,
    })
  }
  return { width: W, height: H, shapes }
}
