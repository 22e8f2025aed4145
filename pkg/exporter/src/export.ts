/**
 * Batch export: WAV directory in, .fseq or .cseq directory out, plus a
 * provenance sidecar (export.json) recording what produced the batch.
 *
 * The exporter never computes distances or metrics; it only produces
 * interchange files for the assessment toolkit to consume.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { createEncoder, defaultLayer, SAMPLE_RATE_HZ } from "./encoder";
import { atomicWrite, DataError, writeCseq, writeFseq } from "./fseq";
import { assignCodes, CodebookData, loadCodebook } from "./quantize";
import { readWav, resample } from "./wav";

export interface ExportConfig {
  modelId: string;
  /** Encoder block index, 1-based; defaults to the middle of the stack. */
  layer?: number;
  batchSize?: number;
}

export interface ExportResult {
  fileCount: number;
  layer: number;
  outDir: string;
}

function listWavs(audioDir: string): string[] {
  let names: string[];
  try {
    names = fs.readdirSync(audioDir);
  } catch {
    throw new DataError(`${audioDir}: directory not found`);
  }
  const wavs = names.filter((n) => n.toLowerCase().endsWith(".wav")).sort();
  if (wavs.length === 0) {
    throw new DataError(`${audioDir}: no .wav files found`);
  }
  return wavs;
}

function writeSidecar(outDir: string, modelId: string, layer: number, fileCount: number): void {
  const payload = {
    model_id: modelId,
    layer,
    export_time: new Date().toISOString(),
    file_count: fileCount,
  };
  atomicWrite(path.join(outDir, "export.json"), Buffer.from(JSON.stringify(payload, null, 2) + "\n"));
}

function resolveConfig(cfg: ExportConfig): { layer: number; batchSize: number } {
  const layer = cfg.layer ?? defaultLayer(cfg.modelId);
  const batchSize = cfg.batchSize ?? 8;
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new DataError(`batch size must be a positive integer, got ${batchSize}`);
  }
  return { layer, batchSize };
}

export function exportFeatures(audioDir: string, outDir: string, cfg: ExportConfig): ExportResult {
  const encoder = createEncoder(cfg.modelId);
  const { layer, batchSize } = resolveConfig(cfg);
  if (!Number.isInteger(layer) || layer < 1 || layer > encoder.depth) {
    throw new DataError(`layer ${layer} out of range for ${cfg.modelId} (valid: 1..${encoder.depth})`);
  }
  const wavs = listWavs(audioDir);
  fs.mkdirSync(outDir, { recursive: true });
  for (let start = 0; start < wavs.length; start += batchSize) {
    for (const name of wavs.slice(start, start + batchSize)) {
      const audio = resample(readWav(path.join(audioDir, name)), SAMPLE_RATE_HZ);
      const seq = encoder.encode(audio.samples, layer);
      const outName = name.replace(/\.wav$/i, ".fseq");
      writeFseq(seq, path.join(outDir, outName));
    }
  }
  writeSidecar(outDir, cfg.modelId, layer, wavs.length);
  return { fileCount: wavs.length, layer, outDir };
}

export function exportCodes(
  audioDir: string,
  outDir: string,
  cfg: ExportConfig,
  codebookPath: string,
): ExportResult {
  const encoder = createEncoder(cfg.modelId);
  const { layer, batchSize } = resolveConfig(cfg);
  if (!Number.isInteger(layer) || layer < 1 || layer > encoder.depth) {
    throw new DataError(`layer ${layer} out of range for ${cfg.modelId} (valid: 1..${encoder.depth})`);
  }
  const codebook: CodebookData = loadCodebook(codebookPath);
  if (codebook.d !== encoder.dim) {
    throw new DataError(
      `dimension mismatch: ${cfg.modelId} produces ${encoder.dim}-dimensional frames, ` +
        `codebook is ${codebook.d}-dimensional`,
    );
  }
  const wavs = listWavs(audioDir);
  fs.mkdirSync(outDir, { recursive: true });
  for (let start = 0; start < wavs.length; start += batchSize) {
    for (const name of wavs.slice(start, start + batchSize)) {
      const audio = resample(readWav(path.join(audioDir, name)), SAMPLE_RATE_HZ);
      const seq = encoder.encode(audio.samples, layer);
      const codes = assignCodes(seq, codebook);
      const outName = name.replace(/\.wav$/i, ".cseq");
      writeCseq(codes, path.join(outDir, outName));
    }
  }
  writeSidecar(outDir, cfg.modelId, layer, wavs.length);
  return { fileCount: wavs.length, layer, outDir };
}
