// Export jobs: corpus in, binary store (or score TSV) plus sidecar out.

import { writeFileSync } from 'node:fs';

import { DEFAULT_ENCODER, EncoderConfig, meanPool, sentenceLogProb,
  tokenVector } from './encoder.js';
import { loadCorpus, TokenizedSentence } from './tokenize.js';
import { EmbeddingStore, floatChecksum, StoreEntry, writeStore } from './useb.js';

export type ExportKind =
  | 'static-word'
  | 'contextual-token'
  | 'sentence'
  | 'lm-scores';

export interface ExportJob {
  kind: ExportKind;
  corpusPath: string;
  outPath: string;
  encoder?: Partial<EncoderConfig>;
}

export interface Sidecar {
  model: string;
  layer: number;
  kind: ExportKind;
  dimension: number;
  entryCount: number;
  sentenceCount: number;
  skipped: number;
  pooling: string;
  checksum: string | null;
}

function staticEntries(corpus: TokenizedSentence[], config: EncoderConfig): StoreEntry[] {
  const seen = new Set<string>();
  const entries: StoreEntry[] = [];
  for (const sentence of corpus) {
    for (const token of sentence.tokens) {
      if (seen.has(token)) {
        continue;
      }
      seen.add(token);
      entries.push({ key: token, vector: tokenVector(token, config) });
    }
  }
  return entries;
}

function contextualEntries(corpus: TokenizedSentence[], config: EncoderConfig): StoreEntry[] {
  const entries: StoreEntry[] = [];
  corpus.forEach((sentence, i) => {
    sentence.tokens.forEach((token, j) => {
      entries.push({ key: `${i}:${j}`, vector: tokenVector(token, config) });
    });
  });
  return entries;
}

function sentenceEntries(corpus: TokenizedSentence[], config: EncoderConfig): StoreEntry[] {
  return corpus.map((sentence, i) => ({
    key: `${i}`,
    vector: meanPool(
      sentence.tokens.map((t) => tokenVector(t, config)),
      config.dimension,
    ),
  }));
}

export function runExport(job: ExportJob): Sidecar {
  const config: EncoderConfig = { ...DEFAULT_ENCODER, ...job.encoder };
  const corpus = loadCorpus(job.corpusPath);

  let checksum: string | null = null;
  let entryCount: number;
  if (job.kind === 'lm-scores') {
    const lines = corpus.map(
      (sentence, i) => `${i}\t${sentenceLogProb(sentence.tokens, config)}`,
    );
    writeFileSync(job.outPath, lines.join('\n') + (lines.length ? '\n' : ''));
    entryCount = corpus.length;
  } else {
    const entries =
      job.kind === 'static-word'
        ? staticEntries(corpus, config)
        : job.kind === 'contextual-token'
          ? contextualEntries(corpus, config)
          : sentenceEntries(corpus, config);
    const store: EmbeddingStore = {
      kind: job.kind,
      dimension: config.dimension,
      entries,
    };
    writeStore(job.outPath, store);
    checksum = floatChecksum(store);
    entryCount = entries.length;
  }

  const sidecar: Sidecar = {
    model: config.model,
    layer: config.layer,
    kind: job.kind,
    dimension: config.dimension,
    entryCount,
    sentenceCount: corpus.length,
    skipped: 0,
    pooling: 'mean-over-subwords',
    checksum,
  };
  writeFileSync(`${job.outPath}.json`, JSON.stringify(sidecar, null, 2) + '\n');
  return sidecar;
}
