/**
 * Frame encoders producing 50 Hz feature sequences from 16 kHz audio.
 *
 * The Encoder interface is the plug point for checkpoint-backed models.
 * The bundled implementation is a deterministic stand-in: a log-mel
 * frontend followed by a stack of seeded tanh projection blocks, where
 * the requested layer selects how many blocks are applied.  It needs no
 * downloads, produces the same bytes on every run, and exercises every
 * part of the export contract (frame rate, layer indexing, fixed
 * dimensionality) that downstream consumers rely on.
 */

import { DataError, FeatureSequence } from "./fseq";
import { fnv1a64, SplitMix64 } from "./rng";

export const SAMPLE_RATE_HZ = 16000;
export const FRAME_RATE_HZ = 50;
const WINDOW = 400; // 25 ms
const HOP = 320; // 20 ms
const FFT_SIZE = 512;
const N_MELS = 32;
const LOG_FLOOR = 1e-10;

export interface Encoder {
  readonly modelId: string;
  readonly depth: number;
  readonly dim: number;
  readonly frameRateHz: number;
  encode(samples: Float64Array, layer: number): FeatureSequence;
}

interface ModelShape {
  depth: number;
  dim: number;
}

export const MODEL_REGISTRY: Record<string, ModelShape> = {
  "standin-base": { depth: 12, dim: 64 },
  "standin-small": { depth: 6, dim: 32 },
};

export function createEncoder(modelId: string): Encoder {
  const shape = MODEL_REGISTRY[modelId];
  if (!shape) {
    const known = Object.keys(MODEL_REGISTRY).sort().join(", ");
    throw new DataError(`unknown model id ${JSON.stringify(modelId)}; available: ${known}`);
  }
  return new StandInEncoder(modelId, shape.depth, shape.dim);
}

export function defaultLayer(modelId: string): number {
  const encoder = createEncoder(modelId);
  return Math.floor(encoder.depth / 2);
}

// precomputed FFT tables for the fixed size
const BIT_REVERSED = (() => {
  const bits = Math.log2(FFT_SIZE);
  const table = new Uint32Array(FFT_SIZE);
  for (let i = 0; i < FFT_SIZE; i++) {
    let rev = 0;
    for (let b = 0; b < bits; b++) rev = (rev << 1) | ((i >> b) & 1);
    table[i] = rev;
  }
  return table;
})();

/** In-place iterative radix-2 FFT over interleaved re/im arrays. */
function fft(re: Float64Array, im: Float64Array): void {
  const n = FFT_SIZE;
  for (let i = 0; i < n; i++) {
    const j = BIT_REVERSED[i];
    if (j > i) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const angle = (-2 * Math.PI) / len;
    const wRe = Math.cos(angle);
    const wIm = Math.sin(angle);
    for (let start = 0; start < n; start += len) {
      let curRe = 1.0;
      let curIm = 0.0;
      for (let k = 0; k < len / 2; k++) {
        const a = start + k;
        const b = a + len / 2;
        const tRe = re[b] * curRe - im[b] * curIm;
        const tIm = re[b] * curIm + im[b] * curRe;
        re[b] = re[a] - tRe;
        im[b] = im[a] - tIm;
        re[a] += tRe;
        im[a] += tIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

function hzToMel(hz: number): number {
  return 2595 * Math.log10(1 + hz / 700);
}

function melToHz(mel: number): number {
  return 700 * (10 ** (mel / 2595) - 1);
}

/** Triangular mel filterbank over the one-sided spectrum. */
function melFilterbank(): Float64Array[] {
  const nBins = FFT_SIZE / 2 + 1;
  const melPoints = new Float64Array(N_MELS + 2);
  const melMax = hzToMel(SAMPLE_RATE_HZ / 2);
  for (let i = 0; i < melPoints.length; i++) {
    melPoints[i] = (melMax * i) / (N_MELS + 1);
  }
  const binHz = SAMPLE_RATE_HZ / FFT_SIZE;
  const filters: Float64Array[] = [];
  for (let m = 1; m <= N_MELS; m++) {
    const lo = melToHz(melPoints[m - 1]);
    const mid = melToHz(melPoints[m]);
    const hi = melToHz(melPoints[m + 1]);
    const filt = new Float64Array(nBins);
    for (let bin = 0; bin < nBins; bin++) {
      const hz = bin * binHz;
      if (hz >= lo && hz <= mid && mid > lo) {
        filt[bin] = (hz - lo) / (mid - lo);
      } else if (hz > mid && hz <= hi && hi > mid) {
        filt[bin] = (hi - hz) / (hi - mid);
      }
    }
    filters.push(filt);
  }
  return filters;
}

const HAMMING = (() => {
  const w = new Float64Array(WINDOW);
  for (let i = 0; i < WINDOW; i++) {
    w[i] = 0.54 - 0.46 * Math.cos((2 * Math.PI * i) / (WINDOW - 1));
  }
  return w;
})();

const MEL_FILTERS = melFilterbank();

function logMelFrame(samples: Float64Array, start: number): Float64Array {
  const re = new Float64Array(FFT_SIZE);
  const im = new Float64Array(FFT_SIZE);
  for (let i = 0; i < WINDOW; i++) {
    re[i] = samples[start + i] * HAMMING[i];
  }
  fft(re, im);
  const nBins = FFT_SIZE / 2 + 1;
  const mag = new Float64Array(nBins);
  for (let i = 0; i < nBins; i++) {
    mag[i] = Math.hypot(re[i], im[i]);
  }
  const out = new Float64Array(N_MELS);
  for (let m = 0; m < N_MELS; m++) {
    let acc = 0;
    const filt = MEL_FILTERS[m];
    for (let i = 0; i < nBins; i++) acc += filt[i] * mag[i];
    out[m] = Math.log(Math.max(acc, LOG_FLOOR));
  }
  return out;
}

interface Block {
  weights: Float64Array; // dim x inDim, row-major
  bias: Float64Array;
  inDim: number;
}

class StandInEncoder implements Encoder {
  readonly frameRateHz = FRAME_RATE_HZ;
  private blocks: Block[] = [];

  constructor(
    readonly modelId: string,
    readonly depth: number,
    readonly dim: number,
  ) {}

  private block(index: number): Block {
    while (this.blocks.length <= index) {
      const l = this.blocks.length;
      const inDim = l === 0 ? N_MELS : this.dim;
      const gen = new SplitMix64(fnv1a64(`${this.modelId}/block${l}`));
      const weights = new Float64Array(this.dim * inDim);
      for (let i = 0; i < weights.length; i++) weights[i] = gen.nextSigned();
      const bias = new Float64Array(this.dim);
      for (let i = 0; i < bias.length; i++) bias[i] = gen.nextSigned() * 0.1;
      this.blocks.push({ weights, bias, inDim });
    }
    return this.blocks[index];
  }

  encode(samples: Float64Array, layer: number): FeatureSequence {
    if (!Number.isInteger(layer) || layer < 1 || layer > this.depth) {
      throw new DataError(
        `layer ${layer} out of range for ${this.modelId} (valid: 1..${this.depth})`,
      );
    }
    if (samples.length < WINDOW) {
      throw new DataError(
        `audio too short: ${samples.length} samples, need at least ${WINDOW}`,
      );
    }
    const t = 1 + Math.floor((samples.length - WINDOW) / HOP);
    const frames = new Float32Array(t * this.dim);
    for (let fi = 0; fi < t; fi++) {
      let h = logMelFrame(samples, fi * HOP);
      for (let l = 0; l < layer; l++) {
        const { weights, bias, inDim } = this.block(l);
        const scale = 1 / Math.sqrt(inDim);
        const next = new Float64Array(this.dim);
        for (let row = 0; row < this.dim; row++) {
          let acc = 0;
          const base = row * inDim;
          for (let col = 0; col < inDim; col++) {
            acc += weights[base + col] * h[col];
          }
          next[row] = Math.tanh(acc * scale + bias[row]);
        }
        h = next;
      }
      frames.set(Float32Array.from(h), fi * this.dim);
    }
    return { frames, t, d: this.dim, frameRateHz: this.frameRateHz };
  }
}
