#!/usr/bin/env node
import { writeFileSync } from 'node:fs'
import { CsvError, readCsv } from './csv.js'
import { profileFigure, rateFigure } from './figures.js'
import { toPng } from './png.js'
import { toSvg } from './svg.js'
import type { Figure } from './shapes.js'

function writeFigure(fig: Figure, outPath: string) {
  if (outPath.endsWith('.png')) {
    writeFileSync(outPath, toPng(fig))
  } else if (outPath.endsWith('.svg')) {
    writeFileSync(outPath, toSvg(fig))
  } else {
    throw new Error(`unsupported output format: ${outPath} (use .svg or .png)`)
  }
}

function usage(): never {
  console.error(
    'usage: slitgeo-plot render-profile <profile.csv> <out.svg|out.png>\n' +
    '       slitgeo-plot render-rate <chain-or-slow.csv> <out.svg|out.png> [--e0 N]',
  )
  process.exit(1)
}

export function main(argv: string[]): number {
  const [cmd, input, output, ...rest] = argv
  if (!cmd || !input || !output) usage()
  let e0 = 4
  const flag = rest.indexOf('--e0')
  if (flag >= 0 && rest[flag + 1]) e0 = Number(rest[flag + 1])
  try {
    const table = readCsv(input)
    if (cmd === 'render-profile') {
      writeFigure(profileFigure(table), output)
    } else if (cmd === 'render-rate') {
      writeFigure(rateFigure(table, e0), output)
    } else {
      usage()
    }
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`csv error: ${err.message}`)
      return 2
    }
    console.error(`error: ${(err as Error).message}`)
    return 1
  }
  return 0
}

process.exit(main(process.argv.slice(2)))
