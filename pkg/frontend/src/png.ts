/** Dependency-free raster backend: figure primitives to an RGB PNG.
 *  Lines are drawn by DDA with a square pen, text with a 5x7 bitmap font;
 *  IDAT is deflated with node:zlib. */

import { deflateSync } from 'node:zlib'
import type { Figure, Shape } from './shapes.js'

const FONT: Record<string, number[]> = {
  ' ': [0x00, 0x00, 0x00, 0x00, 0x00],
  '.': [0x00, 0x60, 0x60, 0x00, 0x00],
  ',': [0x00, 0x50, 0x30, 0x00, 0x00],
  '-': [0x08, 0x08, 0x08, 0x08, 0x08],
  '+': [0x08, 0x08, 0x3e, 0x08, 0x08],
  '=': [0x14, 0x14, 0x14, 0x14, 0x14],
  ':': [0x00, 0x36, 0x36, 0x00, 0x00],
  '/': [0x20, 0x10, 0x08, 0x04, 0x02],
  '(': [0x00, 0x1c, 0x22, 0x41, 0x00],
  ')': [0x00, 0x41, 0x22, 0x1c, 0x00],
  '|': [0x00, 0x00, 0x7f, 0x00, 0x00],
  '0': [0x3e, 0x51, 0x49, 0x45, 0x3e],
  '1': [0x00, 0x42, 0x7f, 0x40, 0x00],
  '2': [0x42, 0x61, 0x51, 0x49, 0x46],
  '3': [0x21, 0x41, 0x45, 0x4b, 0x31],
  '4': [0x18, 0x14, 0x12, 0x7f, 0x10],
  '5': [0x27, 0x45, 0x45, 0x45, 0x39],
  '6': [0x3c, 0x4a, 0x49, 0x49, 0x30],
  '7': [0x01, 0x71, 0x09, 0x05, 0x03],
  '8': [0x36, 0x49, 0x49, 0x49, 0x36],
  '9': [0x06, 0x49, 0x49, 0x29, 0x1e],
  A: [0x7e, 0x11, 0x11, 0x11, 0x7e],
  B: [0x7f, 0x49, 0x49, 0x49, 0x36],
  C: [0x3e, 0x41, 0x41, 0x41, 0x22],
  D: [0x7f, 0x41, 0x41, 0x22, 0x1c],
  E: [0x7f, 0x49, 0x49, 0x49, 0x41],
  F: [0x7f, 0x09, 0x09, 0x09, 0x01],
  G: [0x3e, 0x41, 0x49, 0x49, 0x7a],
  H: [0x7f, 0x08, 0x08, 0x08, 0x7f],
  I: [0x00, 0x41, 0x7f, 0x41, 0x00],
  J: [0x20, 0x40, 0x41, 0x3f, 0x01],
  K: [0x7f, 0x08, 0x14, 0x22, 0x41],
  L: [0x7f, 0x40, 0x40, 0x40, 0x40],
  M: [0x7f, 0x02, 0x0c, 0x02, 0x7f],
  N: [0x7f, 0x04, 0x08, 0x10, 0x7f],
  O: [0x3e, 0x41, 0x41, 0x41, 0x3e],
  P: [0x7f, 0x09, 0x09, 0x09, 0x06],
  Q: [0x3e, 0x41, 0x51, 0x21, 0x5e],
  R: [0x7f, 0x09, 0x19, 0x29, 0x46],
  S: [0x46, 0x49, 0x49, 0x49, 0x31],
  T: [0x01, 0x01, 0x7f, 0x01, 0x01],
  U: [0x3f, 0x40, 0x40, 0x40, 0x3f],
  V: [0x1f, 0x20, 0x40, 0x20, 0x1f],
  W: [0x3f, 0x40, 0x38, 0x40, 0x3f],
  X: [0x63, 0x14, 0x08, 0x14, 0x63],
  Y: [0x07, 0x08, 0x70, 0x08, 0x07],
  Z: [0x61, 0x51, 0x49, 0x45, 0x43],
}

const COLORS: Record<string, [number, number, number]> = {
  white: [255, 255, 255],
  black: [20, 20, 20],
  '#444': [68, 68, 68],
  '#888': [136, 136, 136],
  '#ccc': [204, 204, 204],
  '#1f77b4': [31, 119, 180],
  '#d62728': [214, 39, 40],
  '#2ca02c': [44, 160, 44],
  '#ff7f0e': [255, 127, 14],
}

function rgb(color: string): [number, number, number] {
  const c = COLORS[color]
  if (c) return c
  if (color.startsWith('#') && color.length === 7) {
    return [
      parseInt(color.slice(1, 3), 16),
      parseInt(color.slice(3, 5), 16),
      parseInt(color.slice(5, 7), 16),
    ]
  }
  return [0, 0, 0]
}

class Canvas {
  data: Uint8Array
  constructor(public w: number, public h: number) {
    this.data = new Uint8Array(w * h * 3).fill(255)
  }

  px(x: number, y: number, c: [number, number, number]) {
    const xi = Math.round(x)
    const yi = Math.round(y)
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) return
    const o = (yi * this.w + xi) * 3
    this.data[o] = c[0]
    this.data[o + 1] = c[1]
    this.data[o + 2] = c[2]
  }

  pen(x: number, y: number, c: [number, number, number], width: number) {
    const r = Math.max(0, Math.floor(width / 2))
    for (let dy = -r; dy <= r; dy++)
      for (let dx = -r; dx <= r; dx++) this.px(x + dx, y + dy, c)
  }

  line(x1: number, y1: number, x2: number, y2: number, c: [number, number, number], width: number) {
    const steps = Math.max(1, Math.ceil(Math.hypot(x2 - x1, y2 - y1)))
    for (let i = 0; i <= steps; i++) {
      const t = i / steps
      this.pen(x1 + t * (x2 - x1), y1 + t * (y2 - y1), c, width)
    }
  }

  disc(cx: number, cy: number, r: number, c: [number, number, number]) {
    for (let dy = -r; dy <= r; dy++)
      for (let dx = -r; dx <= r; dx++)
        if (dx * dx + dy * dy <= r * r) this.px(cx + dx, cy + dy, c)
  }

  text(x: number, y: number, text: string, c: [number, number, number], size: number) {
    // y is the text baseline, as in SVG
    const scale = Math.max(1, Math.round(size / 8))
    let cx = Math.round(x)
    const top = Math.round(y) - 7 * scale
    for (const ch of text) {
      const glyph = FONT[ch.toUpperCase()] ?? FONT[' ']
      for (let col = 0; col < 5; col++) {
        for (let row = 0; row < 7; row++) {
          if ((glyph[col] >> row) & 1) {
            for (let sy = 0; sy < scale; sy++)
              for (let sx = 0; sx < scale; sx++)
                this.px(cx + col * scale + sx, top + row * scale + sy, c)
          }
        }
      }
      cx += 6 * scale
    }
  }
}

function drawShape(canvas: Canvas, s: Shape) {
  switch (s.kind) {
    case 'rect': {
      const c = rgb(s.fill)
      for (let y = 0; y < s.h; y++)
        for (let x = 0; x < s.w; x++) canvas.px(s.x + x, s.y + y, c)
      return
    }
    case 'line':
      canvas.line(s.x1, s.y1, s.x2, s.y2, rgb(s.stroke), s.width)
      return
    case 'polyline': {
      const c = rgb(s.stroke)
      for (let i = 1; i < s.points.length; i++) {
        const [x1, y1] = s.points[i - 1]
        const [x2, y2] = s.points[i]
        canvas.line(x1, y1, x2, y2, c, s.width)
      }
      return
    }
    case 'circle':
      canvas.disc(Math.round(s.cx), Math.round(s.cy), Math.max(1, Math.round(s.r)), rgb(s.fill))
      return
    case 'text':
      canvas.text(s.x, s.y, s.text, rgb(s.fill), s.size)
      return
  }
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256)
  for (let n = 0; n < 256; n++) {
    let c = n
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1
    table[n] = c >>> 0
  }
  return table
})()

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff
  for (const b of buf) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8)
  return (c ^ 0xffffffff) >>> 0
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8)
  head.writeUInt32BE(data.length, 0)
  head.write(type, 4, 'ascii')
  const body = Buffer.concat([Buffer.from(type, 'ascii'), Buffer.from(data)])
  const tail = Buffer.alloc(4)
  tail.writeUInt32BE(crc32(body), 0)
  return Buffer.concat([head, Buffer.from(data), tail])
}

export function toPng(fig: Figure): Buffer {
  const canvas = new Canvas(Math.round(fig.width), Math.round(fig.height))
  for (const s of fig.shapes) drawShape(canvas, s)
  const { w, h, data } = canvas
  const raw = Buffer.alloc(h * (1 + w * 3))
  for (let y = 0; y < h; y++) {
    raw[y * (1 + w * 3)] = 0 // filter: none
    data.subarray(y * w * 3, (y + 1) * w * 3).forEach((v, i) => {
      raw[y * (1 + w * 3) + 1 + i] = v
    })
  }
  const ihdr = Buffer.alloc(13)
  ihdr.writeUInt32BE(w, 0)
  ihdr.writeUInt32BE(h, 4)
  ihdr[8] = 8 // bit depth
  ihdr[9] = 2 // color type: truecolor
  const sig = Buffer.from([137, 80, 78, 71, 13, 10, 26, 10])
  return Buffer.concat([
    sig,
    chunk('IHDR', ihdr),
    chunk('IDAT', deflateSync(raw, { level: 9 })),
    chunk('IEND', new Uint8Array(0)),
  ])
}
