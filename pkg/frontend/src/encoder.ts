// Deterministic multilingual-encoder stand-in.
//
// Real deployments would call a pretrained encoder here; this sandboxed
// implementation derives every subword vector from a SHA-256 stream over
// (model, layer, subword), so identical inputs always produce identical
// store bytes and no network or model weights are needed. Word vectors
// are the mean over subword vectors, matching the documented pooling.

import { createHash } from 'node:crypto';

export interface EncoderConfig {
  model: string;
  layer: number;
  dimension: number;
  maxSubwordLength: number;
}

export const DEFAULT_ENCODER: EncoderConfig = {
  model: 'hash-gauss-v1',
  layer: -1,
  dimension: 32,
  maxSubwordLength: 4,
};

export function subwords(token: string, maxLength: number): string[] {
  const chars = Array.from(token);
  const pieces: string[] = [];
  for (let i = 0; i < chars.length; i += maxLength) {
    pieces.push(chars.slice(i, i + maxLength).join(''));
  }
  return pieces;
}

function* uint32Stream(seed: string): Generator<number> {
  for (let block = 0; ; block++) {
    const digest = createHash('sha256').update(`${seed}#${block}`).digest();
    for (let i = 0; i + 4 <= digest.length; i += 4) {
      yield digest.readUInt32LE(i);
    }
  }
}

// Box-Muller over the hash stream; uniforms are strictly inside (0, 1).
function gaussians(seed: string, count: number): Float64Array {
  const out = new Float64Array(count);
  const stream = uint32Stream(seed);
  for (let i = 0; i < count; i += 2) {
    const u1 = (stream.next().value + 1) / 4294967297;
    const u2 = (stream.next().value + 1) / 4294967297;
    const r = Math.sqrt(-2 * Math.log(u1));
    out[i] = r * Math.cos(2 * Math.PI * u2);
    if (i + 1 < count) {
      out[i + 1] = r * Math.sin(2 * Math.PI * u2);
    }
  }
  return out;
}

export function subwordVector(piece: string, config: EncoderConfig): Float64Array {
  const seed = `${config.model}|layer=${config.layer}|${piece}`;
  return gaussians(seed, config.dimension);
}

export function tokenVector(token: string, config: EncoderConfig): Float32Array {
  const pieces = subwords(token, config.maxSubwordLength);
  const acc = new Float64Array(config.dimension);
  for (const piece of pieces) {
    const vec = subwordVector(piece, config);
    for (let i = 0; i < config.dimension; i++) {
      acc[i] += vec[i];
    }
  }
  const out = new Float32Array(config.dimension);
  for (let i = 0; i < config.dimension; i++) {
    out[i] = acc[i] / pieces.length;
  }
  return out;
}

export function meanPool(vectors: Float32Array[], dimension: number): Float32Array {
  const acc = new Float64Array(dimension);
  for (const vec of vectors) {
    for (let i = 0; i < dimension; i++) {
      acc[i] += vec[i];
    }
  }
  const out = new Float32Array(dimension);
  for (let i = 0; i < dimension; i++) {
    out[i] = acc[i] / vectors.length;
  }
  return out;
}

// Stand-in per-sentence fluency score: mean per-token log probability
// under a deterministic pseudo-model, in a plausible negative range.
export function sentenceLogProb(tokens: string[], config: EncoderConfig): number {
  let total = 0;
  for (const token of tokens) {
    const stream = uint32Stream(`${config.model}|lm|${token}`);
    const unit = stream.next().value / 4294967296;
    total += -1 - 7 * unit;
  }
  return total / tokens.length;
}
