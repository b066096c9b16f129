import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { runExport } from '../src/export.js';
import { tokenize } from '../src/tokenize.js';
import { floatChecksum, readStore } from '../src/useb.js';

const CORPUS = [
  'the coin fell on the table',
  'a small coin, old and worn.',
  'tables hold coins',
];

function workspace(): { dir: string; corpus: string } {
  const dir = mkdtempSync(join(tmpdir(), 'export-'));
  const corpus = join(dir, 'corpus.txt');
  writeFileSync(corpus, CORPUS.join('\n') + '\n');
  return { dir, corpus };
}

describe('tokenize', () => {
  it('detaches punctuation and splits on whitespace', () => {
    expect(tokenize('a small coin, old.').tokens).toEqual([
      'a', 'small', 'coin', ',', 'old', '.',
    ]);
  });

  it('applies NFC normalization', () => {
    expect(tokenize('münze').tokens).toEqual(['münze']);
  });
});

describe('runExport', () => {
  it('static store holds each unique token once, in corpus order', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'static.useb');
    const sidecar = runExport({ kind: 'static-word', corpusPath: corpus, outPath: out });
    const store = readStore(out);
    const expected = [...new Set(CORPUS.flatMap((line) => tokenize(line).tokens))];
    expect(store.entries.map((e) => e.key)).toEqual(expected);
    expect(sidecar.entryCount).toBe(expected.length);
    expect(sidecar.sentenceCount).toBe(3);
  });

  it('contextual store has one i:j entry per token occurrence', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'ctx.useb');
    runExport({ kind: 'contextual-token', corpusPath: corpus, outPath: out });
    const store = readStore(out);
    const tokenized = CORPUS.map((line) => tokenize(line).tokens);
    const total = tokenized.reduce((acc, toks) => acc + toks.length, 0);
    expect(store.entries.length).toBe(total);
    const keys = tokenized.flatMap((toks, i) => toks.map((_, j) => `${i}:${j}`));
    expect(store.entries.map((e) => e.key)).toEqual(keys);
  });

  it('sentence store has one entry per line, keyed by index', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'sent.useb');
    runExport({ kind: 'sentence', corpusPath: corpus, outPath: out });
    const store = readStore(out);
    expect(store.entries.map((e) => e.key)).toEqual(['0', '1', '2']);
    expect(store.dimension).toBe(32);
  });

  it('exports are byte-identical across runs', () => {
    const { dir, corpus } = workspace();
    const a = join(dir, 'a.useb');
    const b = join(dir, 'b.useb');
    runExport({ kind: 'contextual-token', corpusPath: corpus, outPath: a });
    runExport({ kind: 'contextual-token', corpusPath: corpus, outPath: b });
    expect(readFileSync(a)).toEqual(readFileSync(b));
  });

  it('same surface token gets the same vector everywhere', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'ctx.useb');
    runExport({ kind: 'contextual-token', corpusPath: corpus, outPath: out });
    const store = readStore(out);
    // "coin" occurs at 0:1 and 1:2.
    const first = store.entries.find((e) => e.key === '0:1')!;
    const second = store.entries.find((e) => e.key === '1:2')!;
    expect(Buffer.from(first.vector.buffer)).toEqual(Buffer.from(second.vector.buffer));
  });

  it('lm-scores writes one negative score per sentence', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'lm.tsv');
    const sidecar = runExport({ kind: 'lm-scores', corpusPath: corpus, outPath: out });
    expect(sidecar.checksum).toBeNull();
    const rows = readFileSync(out, 'utf-8').trim().split('\n');
    expect(rows.length).toBe(3);
    rows.forEach((row, i) => {
      const [idx, score] = row.split('\t');
      expect(idx).toBe(`${i}`);
      expect(Number(score)).toBeLessThan(0);
    });
  });

  it('sidecar checksum matches a recompute from the written store', () => {
    const { dir, corpus } = workspace();
    const out = join(dir, 'static.useb');
    const sidecar = runExport({ kind: 'static-word', corpusPath: corpus, outPath: out });
    const onDisk = JSON.parse(readFileSync(`${out}.json`, 'utf-8'));
    expect(onDisk.checksum).toBe(sidecar.checksum);
    expect(floatChecksum(readStore(out))).toBe(sidecar.checksum);
  });
});
