export { DataError, readFseq, writeFseq, readCseq, writeCseq, encodeFseq, encodeCseq } from "./fseq";
export type { FeatureSequence, CodeSequence } from "./fseq";
export { readWav, resample } from "./wav";
export type { Audio } from "./wav";
export { createEncoder, defaultLayer, MODEL_REGISTRY, SAMPLE_RATE_HZ, FRAME_RATE_HZ } from "./encoder";
export type { Encoder } from "./encoder";
export { loadCodebook, assignCodes } from "./quantize";
export type { CodebookData } from "./quantize";
export { exportFeatures, exportCodes } from "./export";
export type { ExportConfig, ExportResult } from "./export";
export { fnv1a64, SplitMix64 } from "./rng";
