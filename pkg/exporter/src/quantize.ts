/**
 * Nearest-centroid code assignment, matching the fewshotword toolkit's
 * quantizer decision rule: squared Euclidean compared through
 * |c|^2 - 2 x.c in float64 (the |x|^2 term is constant per frame), ties
 * to the lowest centroid index.
 */

import { CodeSequence, DataError, FeatureSequence, readFseq } from "./fseq";

export interface CodebookData {
  centroids: Float32Array; // k x d row-major
  k: number;
  d: number;
}

export function loadCodebook(filePath: string): CodebookData {
  const seq = readFseq(filePath);
  return { centroids: seq.frames, k: seq.t, d: seq.d };
}

export function assignCodes(seq: FeatureSequence, codebook: CodebookData): CodeSequence {
  if (seq.d !== codebook.d) {
    throw new DataError(
      `dimension mismatch: features are ${seq.d}-dimensional, codebook is ${codebook.d}-dimensional`,
    );
  }
  const { k, d } = codebook;
  const selfDot = new Float64Array(k);
  for (let ci = 0; ci < k; ci++) {
    let acc = 0;
    for (let j = 0; j < d; j++) {
      const v = codebook.centroids[ci * d + j];
      acc += v * v;
    }
    selfDot[ci] = acc;
  }
  const codes = new Uint32Array(seq.t);
  for (let fi = 0; fi < seq.t; fi++) {
    let best = 0;
    let bestScore = Infinity;
    for (let ci = 0; ci < k; ci++) {
      let dot = 0;
      for (let j = 0; j < d; j++) {
        dot += seq.frames[fi * d + j] * codebook.centroids[ci * d + j];
      }
      const score = selfDot[ci] - 2 * dot;
      if (score < bestScore) {
        bestScore = score;
        best = ci;
      }
    }
    codes[fi] = best;
  }
  return { codes, alphabetSize: k };
}
