// Reader/writer for the toolkit's binary embedding-store format (USEB v1).
//
// Layout, all little-endian: 4-byte magic "USEB", u16 version, u8 kind
// code, u32 dimension, u64 entry count, then per entry a u32 key length,
// the UTF-8 key, and dimension IEEE-754 binary32 components.

import { createHash } from 'node:crypto';
import { readFileSync, writeFileSync } from 'node:fs';

export const MAGIC = 'USEB';
export const FORMAT_VERSION = 1;

export const STORE_KINDS = {
  'static-word': 0,
  'contextual-token': 1,
  sentence: 2,
  'orthogonal-map': 3,
  'bias-vector': 4,
  projection: 5,
} as const;

export type StoreKind = keyof typeof STORE_KINDS;

export interface StoreEntry {
  key: string;
  vector: Float32Array;
}

export interface EmbeddingStore {
  kind: StoreKind;
  dimension: number;
  entries: StoreEntry[];
}

export function writeStore(path: string, store: EmbeddingStore): void {
  const parts: Buffer[] = [];
  const header = Buffer.alloc(4 + 2 + 1 + 4 + 8);
  header.write(MAGIC, 0, 'ascii');
  header.writeUInt16LE(FORMAT_VERSION, 4);
  header.writeUInt8(STORE_KINDS[store.kind], 6);
  header.writeUInt32LE(store.dimension, 7);
  header.writeBigUInt64LE(BigInt(store.entries.length), 11);
  parts.push(header);
  for (const entry of store.entries) {
    if (entry.vector.length !== store.dimension) {
      throw new Error(
        `vector for key ${entry.key} has length ${entry.vector.length}, ` +
          `expected ${store.dimension}`,
      );
    }
    const keyBytes = Buffer.from(entry.key, 'utf-8');
    const lenBuf = Buffer.alloc(4);
    lenBuf.writeUInt32LE(keyBytes.length, 0);
    const vecBuf = Buffer.alloc(4 * store.dimension);
    for (let i = 0; i < store.dimension; i++) {
      vecBuf.writeFloatLE(entry.vector[i], 4 * i);
    }
    parts.push(lenBuf, keyBytes, vecBuf);
  }
  writeFileSync(path, Buffer.concat(parts));
}

export function readStore(path: string): EmbeddingStore {
  const buf = readFileSync(path);
  if (buf.subarray(0, 4).toString('ascii') !== MAGIC) {
    throw new Error(`${path}: bad magic, expected ${MAGIC}`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const kindCode = buf.readUInt8(6);
  const kind = (Object.keys(STORE_KINDS) as StoreKind[]).find(
    (k) => STORE_KINDS[k] === kindCode,
  );
  if (kind === undefined) {
    throw new Error(`${path}: unknown kind code ${kindCode}`);
  }
  const dimension = buf.readUInt32LE(7);
  const count = Number(buf.readBigUInt64LE(11));
  const entries: StoreEntry[] = [];
  let offset = 19;
  for (let n = 0; n < count; n++) {
    const keyLen = buf.readUInt32LE(offset);
    offset += 4;
    const key = buf.subarray(offset, offset + keyLen).toString('utf-8');
    offset += keyLen;
    const vector = new Float32Array(dimension);
    for (let i = 0; i < dimension; i++) {
      vector[i] = buf.readFloatLE(offset + 4 * i);
    }
    offset += 4 * dimension;
    entries.push({ key, vector });
  }
  if (offset !== buf.length) {
    throw new Error(`${path}: ${buf.length - offset} trailing bytes`);
  }
  return { kind, dimension, entries };
}

// Checksum over the concatenated binary32 payload, in entry order. The
// Python side can reproduce it from the loaded store, which makes the
// sidecar verifiable across the language boundary.
export function floatChecksum(store: EmbeddingStore): string {
  const hash = createHash('sha256');
  for (const entry of store.entries) {
    const vecBuf = Buffer.alloc(4 * entry.vector.length);
    for (let i = 0; i < entry.vector.length; i++) {
      vecBuf.writeFloatLE(entry.vector[i], 4 * i);
    }
    hash.update(vecBuf);
  }
  return hash.digest('hex');
}
