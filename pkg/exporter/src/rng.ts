/**
 * Deterministic seeding utilities: FNV-1a string hashing feeding a
 * splitmix64 stream.  BigInt keeps the 64-bit arithmetic exact, so the
 * same (model id, layer, matrix) tuple always produces the same weights
 * on every platform.
 */

const MASK64 = (1n << 64n) - 1n;

export function fnv1a64(text: string): bigint {
  let hash = 0xcbf29ce484222325n;
  for (let i = 0; i < text.length; i++) {
    hash ^= BigInt(text.charCodeAt(i) & 0xff);
    hash = (hash * 0x100000001b3n) & MASK64;
  }
  return hash;
}

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  nextU64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return (z ^ (z >> 31n)) & MASK64;
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }

  /** Uniform double in [-1, 1). */
  nextSigned(): number {
    return this.nextFloat() * 2 - 1;
  }
}
