import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { floatChecksum, readStore, writeStore } from '../src/useb.js';

function tmp(name: string): string {
  return join(mkdtempSync(join(tmpdir(), 'useb-')), name);
}

describe('useb writer/reader', () => {
  it('round-trips a static store bit-exactly', () => {
    const path = tmp('s.useb');
    const entries = Array.from({ length: 20 }, (_, i) => ({
      key: `w${i}`,
      vector: Float32Array.from({ length: 8 }, (_, j) => Math.sin(i * 8 + j)),
    }));
    writeStore(path, { kind: 'static-word', dimension: 8, entries });
    const loaded = readStore(path);
    expect(loaded.kind).toBe('static-word');
    expect(loaded.dimension).toBe(8);
    expect(loaded.entries.length).toBe(20);
    loaded.entries.forEach((entry, i) => {
      expect(entry.key).toBe(entries[i].key);
      expect(Buffer.from(entry.vector.buffer)).toEqual(
        Buffer.from(entries[i].vector.buffer),
      );
    });
  });

  it('round-trips contextual keys and unicode keys', () => {
    const path = tmp('c.useb');
    const entries = [
      { key: '0:0', vector: Float32Array.of(1, 2) },
      { key: 'münze', vector: Float32Array.of(-0.5, 0.25) },
    ];
    writeStore(path, { kind: 'contextual-token', dimension: 2, entries });
    const loaded = readStore(path);
    expect(loaded.entries.map((e) => e.key)).toEqual(['0:0', 'münze']);
  });

  it('rejects a vector of the wrong length', () => {
    const path = tmp('bad.useb');
    expect(() =>
      writeStore(path, {
        kind: 'static-word',
        dimension: 3,
        entries: [{ key: 'x', vector: Float32Array.of(1, 2) }],
      }),
    ).toThrow(/expected 3/);
  });

  it('rejects bad magic', () => {
    const path = tmp('junk.useb');
    writeFileSync(path, Buffer.from('NOPEnonsense'));
    expect(() => readStore(path)).toThrow(/bad magic/);
  });

  it('checksum changes when any float changes', () => {
    const base = {
      kind: 'static-word' as const,
      dimension: 2,
      entries: [{ key: 'a', vector: Float32Array.of(1, 2) }],
    };
    const changed = {
      ...base,
      entries: [{ key: 'a', vector: Float32Array.of(1, 2.0001) }],
    };
    expect(floatChecksum(base)).not.toBe(floatChecksum(changed));
    expect(floatChecksum(base)).toBe(floatChecksum(base));
  });
});
