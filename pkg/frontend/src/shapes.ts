/** Figure primitives shared by the SVG writer and the PNG rasterizer. */

export type Shape =
  | { kind: 'rect'; x: number; y: number; w: number; h: number; fill: string }
  | { kind: 'line'; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number; dash?: number[] }
  | { kind: 'polyline'; points: [number, number][]; stroke: string; width: number; dash?: number[] }
  | { kind: 'circle'; cx: number; cy: number; r: number; fill: string }
  | { kind: 'text'; x: number; y: number; text: string; fill: string; size: number }

export interface Figure {
  width: number
  height: number
  shapes: Shape[]
}

export interface Scale {
  (v: number): number
  domain: [number, number]
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain
  const [r0, r1] = range
  const span = d1 - d0 || 1
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale
  fn.domain = domain
  return fn
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity
  let hi = -Infinity
  for (const v of values) {
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  if (!Number.isFinite(lo)) return [0, 1]
  const span = hi - lo || 1
  return [lo - pad * span, hi + pad * span]
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1
  const step0 = span / count
  const mag = Math.pow(10, Math.floor(Math.log10(step0)))
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count) ?? mag * 10
  const start = Math.ceil(lo / step) * step
  const out: number[] = []
  for (let v = start; v <= hi + 1e-12; v += step) out.push(Number(v.toPrecision(12)))
  return out
}
