import * as fs from "node:fs";

import { fnv1a64, SplitMix64 } from "../src/rng";

/** Mono PCM16 WAV writer for test fixtures. */
export function writeWavPcm16(
  filePath: string,
  samples: Float64Array,
  sampleRateHz = 16000,
  channels = 1,
): void {
  const frames = channels === 2 ? samples.length : samples.length;
  const dataBytes = frames * channels * 2;
  const buf = Buffer.alloc(44 + dataBytes);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + dataBytes, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(channels, 22);
  buf.writeUInt32LE(sampleRateHz, 24);
  buf.writeUInt32LE(sampleRateHz * channels * 2, 28);
  buf.writeUInt16LE(channels * 2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(dataBytes, 40);
  let pos = 44;
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-32768, Math.min(32767, Math.round(samples[i] * 32767)));
    for (let c = 0; c < channels; c++) {
      buf.writeInt16LE(v, pos);
      pos += 2;
    }
  }
  fs.writeFileSync(filePath, buf);
}

/** Deterministic test audio: two sine partials plus seeded noise. */
export function makeTone(tag: string, seconds = 0.5, sampleRateHz = 16000): Float64Array {
  const gen = new SplitMix64(fnv1a64(tag));
  const f1 = 200 + gen.nextFloat() * 1800;
  const f2 = 200 + gen.nextFloat() * 1800;
  const n = Math.round(seconds * sampleRateHz);
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const t = i / sampleRateHz;
    out[i] =
      0.3 * Math.sin(2 * Math.PI * f1 * t) +
      0.2 * Math.sin(2 * Math.PI * f2 * t) +
      0.02 * gen.nextSigned();
  }
  return out;
}
