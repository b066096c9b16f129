// Tokenization mirroring the Python toolkit's contract: NFC normalization,
// punctuation detached as separate tokens, whitespace split.

import { readFileSync } from 'node:fs';

export interface TokenizedSentence {
  text: string;
  tokens: string[];
}

const PUNCT = /\p{P}/u;

export function tokenize(text: string): TokenizedSentence {
  const normalized = text.normalize('NFC');
  let spaced = '';
  for (const ch of normalized) {
    spaced += PUNCT.test(ch) ? ` ${ch} ` : ch;
  }
  const tokens = spaced.split(/\s+/u).filter((t) => t.length > 0);
  return { text: normalized, tokens };
}

export function loadCorpus(path: string): TokenizedSentence[] {
  const raw = readFileSync(path, 'utf-8');
  const sentences: TokenizedSentence[] = [];
  for (const line of raw.split('\n')) {
    if (line.trim().length === 0) {
      continue;
    }
    sentences.push(tokenize(line.replace(/\r$/u, '')));
  }
  return sentences;
}
