/**
 * Minimal RIFF/WAVE reader: mono PCM16 or IEEE float32, any sample rate.
 * Other encodings are rejected rather than guessed at.
 */

import * as fs from "node:fs";

import { DataError } from "./fseq";

export interface Audio {
  samples: Float64Array; // in [-1, 1]
  sampleRateHz: number;
}

export function readWav(filePath: string): Audio {
  const buf = fs.readFileSync(filePath);
  if (
    buf.length < 44 ||
    buf.toString("ascii", 0, 4) !== "RIFF" ||
    buf.toString("ascii", 8, 12) !== "WAVE"
  ) {
    throw new DataError(`${filePath}: not a WAV file`);
  }
  let pos = 12;
  let format: { audioFormat: number; channels: number; sampleRate: number; bits: number } | null =
    null;
  let data: Buffer | null = null;
  while (pos + 8 <= buf.length) {
    const chunkId = buf.toString("ascii", pos, pos + 4);
    const chunkSize = buf.readUInt32LE(pos + 4);
    const body = buf.subarray(pos + 8, pos + 8 + chunkSize);
    if (chunkId === "fmt ") {
      format = {
        audioFormat: body.readUInt16LE(0),
        channels: body.readUInt16LE(2),
        sampleRate: body.readUInt32LE(4),
        bits: body.readUInt16LE(14),
      };
    } else if (chunkId === "data") {
      data = Buffer.from(body);
    }
    pos += 8 + chunkSize + (chunkSize % 2); // chunks are word-aligned
  }
  if (!format || !data) {
    throw new DataError(`${filePath}: missing fmt or data chunk`);
  }
  if (format.channels !== 1) {
    throw new DataError(`${filePath}: mono required, got ${format.channels} channels`);
  }
  let samples: Float64Array;
  if (format.audioFormat === 1 && format.bits === 16) {
    const n = Math.floor(data.length / 2);
    samples = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = data.readInt16LE(i * 2) / 32768.0;
    }
  } else if (format.audioFormat === 3 && format.bits === 32) {
    const n = Math.floor(data.length / 4);
    samples = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = data.readFloatLE(i * 4);
    }
  } else {
    throw new DataError(
      `${filePath}: unsupported encoding (format ${format.audioFormat}, ${format.bits} bits)`,
    );
  }
  return { samples, sampleRateHz: format.sampleRate };
}

/** Linear-interpolation resampler; identity when rates already match. */
export function resample(audio: Audio, targetHz: number): Audio {
  if (audio.sampleRateHz === targetHz) return audio;
  if (audio.samples.length === 0) {
    return { samples: new Float64Array(0), sampleRateHz: targetHz };
  }
  const ratio = audio.sampleRateHz / targetHz;
  const n = Math.max(1, Math.floor(audio.samples.length / ratio));
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const x = i * ratio;
    const lo = Math.floor(x);
    const hi = Math.min(lo + 1, audio.samples.length - 1);
    const frac = x - lo;
    out[i] = audio.samples[lo] * (1 - frac) + audio.samples[hi] * frac;
  }
  return { samples: out, sampleRateHz: targetHz };
}
