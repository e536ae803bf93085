import { mkdtempSync, readFileSync, writeFileSync, statSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join, dirname } from 'node:path'
import { fileURLToPath } from 'node:url'
import { describe, expect, it } from 'vitest'

import { CsvError, parseCsv, readCsv, column } from '../src/csv.js'
import { deviationOf, detectRateKind, formatDeviation, profileFigure, rateFigure } from '../src/figures.js'
import { toPng } from '../src/png.js'
import { toSvg } from '../src/svg.js'

const fixtures = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures')
const tmp = mkdtempSync(join(tmpdir(), 'plotkit-'))

function fixture(name: string) {
  return readCsv(join(fixtures, name))
}

describe('csv parsing', () => {
  it('rejects empty input', () => {
    expect(() => parseCsv('')).toThrow(CsvError)
  })

  it('reports the failing row number', () => {
    try {
      parseCsv('a,b\n1,2\n3\n')
      expect.unreachable()
    } catch (err) {
      expect((err as CsvError).row).toBe(3)
    }
  })

  it('parses fraction cells', () => {
    const t = parseCsv('t,x\n1/4,2\n1/2,3\n')
    expect(column(t, 't')).toEqual([0.25, 0.5])
  })
})

describe('profile figure', () => {
  const table = fixture('profile.csv')

  it('renders SVG with both curves and the annotation', () => {
    const fig = profileFigure(table)
    const svg = toSvg(fig)
    const out = join(tmp, 'profile.svg')
    writeFileSync(out, svg)
    expect(statSync(out).size).toBeGreaterThan(1000)
    expect(svg).toMatch(/stroke="#1f77b4"/)
    expect(svg).toMatch(/stroke="#d62728"/)
    expect(svg).toContain('sup dev =')
  })

  it('annotates exactly the CSV-computed deviation', () => {
    const fig = profileFigure(table)
    const svg = toSvg(fig)
    const f = column(table, 'f_brute')
    const lam = column(table, 'lambda')
    let dev = 0
    for (let i = 0; i < f.length; i++) dev = Math.max(dev, Math.abs(f[i] - lam[i]))
    expect(svg).toContain(`sup dev = ${dev.toFixed(6)}`)
    expect(formatDeviation(deviationOf(table))).toBe(dev.toFixed(6))
  })

  it('renders a valid PNG', () => {
    const png = toPng(profileFigure(table))
    expect(png.subarray(0, 8)).toEqual(Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]))
    expect(png.length).toBeGreaterThan(2000)
  })

  it('reports zero deviation on identity input', () => {
    const rows = ['t,f_brute,lambda,witness_p,witness_q,witness_kind']
    for (let i = 0; i <= 20; i++) {
      const t = i / 4
      const v = Math.abs((t % 4) - 2)
      rows.push(`${t},${v},${v},1,0,Z`)
    }
    const table2 = parseCsv(rows.join('\n') + '\n')
    const svg = toSvg(profileFigure(table2))
    expect(svg).toContain('sup dev = 0.000000')
  })

  it('rejects a CSV without the model column', () => {
    expect(() => profileFigure(parseCsv('t,f_brute\n1,2\n'))).toThrow(/lambda/)
  })

  it('is deterministic', () => {
    expect(toSvg(profileFigure(table))).toBe(toSvg(profileFigure(table)))
  })
})

describe('rate figure', () => {
  it('renders the chain scatter with the reference slope', () => {
    const table = fixture('nonergodic.csv')
    expect(detectRateKind(table)).toBe('chain')
    const svg = toSvg(rateFigure(table, 4))
    writeFileSync(join(tmp, 'rate.svg'), svg)
    expect(svg).toContain('reference slope 0.8000')
    expect(svg).toMatch(/circle/)
  })

  it('renders the slow-run band figure', () => {
    const table = fixture('slow.csv')
    expect(detectRateKind(table)).toBe('slow')
    const svg = toSvg(rateFigure(table))
    expect(svg).toContain('target band')
    const png = toPng(rateFigure(table))
    expect(png.length).toBeGreaterThan(2000)
  })

  it('rejects an empty CSV', () => {
    expect(() => rateFigure(parseCsv('T,M\n'))).toThrow(CsvError)
  })
})
