/**
 * Binary interchange containers shared with the fewshotword toolkit.
 *
 * .fseq: "FSQ1", u32 frame count T, u32 dimension D, f32 frame rate in Hz
 *        (0.0 when absent), then T*D little-endian float32 frames.
 * .cseq: "CSQ1", u32 length T, u32 alphabet size K, then T u32 codes.
 *
 * Writes are atomic (temp file + rename) so interrupted runs never leave
 * partial artifacts.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export class DataError extends Error {}

export interface FeatureSequence {
  /** Row-major T x D float32 frames. */
  frames: Float32Array;
  t: number;
  d: number;
  /** Frames per second; null when the producer did not record one. */
  frameRateHz: number | null;
}

export interface CodeSequence {
  codes: Uint32Array;
  alphabetSize: number;
}

const FSEQ_MAGIC = "FSQ1";
const CSEQ_MAGIC = "CSQ1";

export function atomicWrite(filePath: string, payload: Buffer): void {
  const dir = path.dirname(filePath);
  const tmp = path.join(
    dir,
    `.tmp-${process.pid}-${Math.random().toString(36).slice(2)}~`,
  );
  fs.writeFileSync(tmp, payload);
  fs.renameSync(tmp, filePath);
}

export function encodeFseq(seq: FeatureSequence): Buffer {
  if (seq.t < 1 || seq.d < 1) {
    throw new DataError(`need at least one frame and one dimension, got ${seq.t}x${seq.d}`);
  }
  if (seq.frames.length !== seq.t * seq.d) {
    throw new DataError(`frame buffer has ${seq.frames.length} values, expected ${seq.t * seq.d}`);
  }
  for (const v of seq.frames) {
    if (!Number.isFinite(v)) throw new DataError("non-finite frame value");
  }
  const header = Buffer.alloc(16);
  header.write(FSEQ_MAGIC, 0, "ascii");
  header.writeUInt32LE(seq.t, 4);
  header.writeUInt32LE(seq.d, 8);
  header.writeFloatLE(seq.frameRateHz ?? 0.0, 12);
  const body = Buffer.alloc(seq.frames.length * 4);
  for (let i = 0; i < seq.frames.length; i++) {
    body.writeFloatLE(seq.frames[i], i * 4);
  }
  return Buffer.concat([header, body]);
}

export function writeFseq(seq: FeatureSequence, filePath: string): void {
  atomicWrite(filePath, encodeFseq(seq));
}

function readAll(filePath: string): Buffer {
  try {
    return fs.readFileSync(filePath);
  } catch {
    throw new DataError(`${filePath}: file not found`);
  }
}

export function readFseq(filePath: string): FeatureSequence {
  const buf = readAll(filePath);
  if (buf.length < 16 || buf.toString("ascii", 0, 4) !== FSEQ_MAGIC) {
    throw new DataError(`${filePath}: not a feature sequence file`);
  }
  const t = buf.readUInt32LE(4);
  const d = buf.readUInt32LE(8);
  const rate = buf.readFloatLE(12);
  if (buf.length !== 16 + t * d * 4) {
    throw new DataError(`${filePath}: expected ${16 + t * d * 4} bytes, got ${buf.length}`);
  }
  const frames = new Float32Array(t * d);
  for (let i = 0; i < frames.length; i++) {
    frames[i] = buf.readFloatLE(16 + i * 4);
  }
  for (const v of frames) {
    if (!Number.isFinite(v)) throw new DataError(`${filePath}: non-finite frame value`);
  }
  return { frames, t, d, frameRateHz: rate === 0.0 ? null : rate };
}

export function encodeCseq(seq: CodeSequence): Buffer {
  if (seq.codes.length < 1) throw new DataError("empty code sequence");
  if (seq.alphabetSize < 1) throw new DataError(`alphabet size must be positive, got ${seq.alphabetSize}`);
  for (const c of seq.codes) {
    if (c >= seq.alphabetSize) {
      throw new DataError(`code ${c} outside alphabet of size ${seq.alphabetSize}`);
    }
  }
  const buf = Buffer.alloc(12 + seq.codes.length * 4);
  buf.write(CSEQ_MAGIC, 0, "ascii");
  buf.writeUInt32LE(seq.codes.length, 4);
  buf.writeUInt32LE(seq.alphabetSize, 8);
  for (let i = 0; i < seq.codes.length; i++) {
    buf.writeUInt32LE(seq.codes[i], 12 + i * 4);
  }
  return buf;
}

export function writeCseq(seq: CodeSequence, filePath: string): void {
  atomicWrite(filePath, encodeCseq(seq));
}

export function readCseq(filePath: string): CodeSequence {
  const buf = readAll(filePath);
  if (buf.length < 12 || buf.toString("ascii", 0, 4) !== CSEQ_MAGIC) {
    throw new DataError(`${filePath}: not a code sequence file`);
  }
  const t = buf.readUInt32LE(4);
  const k = buf.readUInt32LE(8);
  if (buf.length !== 12 + t * 4) {
    throw new DataError(`${filePath}: expected ${12 + t * 4} bytes, got ${buf.length}`);
  }
  const codes = new Uint32Array(t);
  for (let i = 0; i < t; i++) {
    codes[i] = buf.readUInt32LE(12 + i * 4);
    if (codes[i] >= k) {
      throw new DataError(`${filePath}: code ${codes[i]} outside alphabet of size ${k}`);
    }
  }
  return { codes, alphabetSize: k };
}
