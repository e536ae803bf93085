import { readFileSync } from 'node:fs'

export class CsvError extends Error {
  constructor(message: string, public readonly row: number) {
    super(`${message} (row ${row})`)
  }
}

export interface Table {
  header: string[]
  rows: string[][]
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0)
  if (lines.length === 0) throw new CsvError('empty CSV', 0)
  const header = lines[0].split(',')
  const rows: string[][] = []
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',')
    if (cells.length !== header.length) {
      throw new CsvError(
        `expected ${header.length} columns, found ${cells.length}`,
        i + 1,
      )
    }
    rows.push(cells)
  }
  if (rows.length === 0) throw new CsvError('no data rows', 1)
  return { header, rows }
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, 'utf8'))
}

/** Numeric column by name; every cell must parse, fractions a/b allowed. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name)
  if (idx < 0) throw new CsvError(`missing column ${name}`, 1)
  return table.rows.map((cells, i) => {
    const v = parseNumeric(cells[idx])
    if (!Number.isFinite(v)) {
      throw new CsvError(`non-numeric value ${cells[idx]} in ${name}`, i + 2)
    }
    return v
  })
}

export function textColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name)
  if (idx < 0) throw new CsvError(`missing column ${name}`, 1)
  return table.rows.map((c) => c[idx])
}

export function parseNumeric(cell: string): number {
  const s = cell.trim()
  const slash = s.indexOf('/')
  if (slash > 0) {
    const num = Number(s.slice(0, slash))
    const den = Number(s.slice(slash + 1))
    return num / den
  }
  return Number(s)
}
