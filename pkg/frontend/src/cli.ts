#!/usr/bin/env node
// CLI wrapper: embed-export --kind contextual-token --corpus c.txt --out c.useb

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { ExportKind, runExport } from './export.js';

const argv = yargs(hideBin(process.argv))
  .option('kind', {
    choices: ['static-word', 'contextual-token', 'sentence', 'lm-scores'] as const,
    demandOption: true,
  })
  .option('corpus', { type: 'string', demandOption: true })
  .option('out', { type: 'string', demandOption: true })
  .option('model', { type: 'string', default: 'hash-gauss-v1' })
  .option('layer', { type: 'number', default: -1 })
  .option('dim', { type: 'number', default: 32 })
  .strict()
  .parseSync();

try {
  const sidecar = runExport({
    kind: argv.kind as ExportKind,
    corpusPath: argv.corpus,
    outPath: argv.out,
    encoder: { model: argv.model, layer: argv.layer, dimension: argv.dim },
  });
  console.log(
    `exported ${sidecar.entryCount} entries (${sidecar.kind}, ` +
      `dim ${sidecar.dimension}) to ${argv.out}`,
  );
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(2);
}
