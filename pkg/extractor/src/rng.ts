/** Deterministic PRNG (splitmix64 over BigInt) for reproducible sampling. */

const MASK64 = (1n << 64n) - 1n;

export class SeededRng {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt(seed) & MASK64;
  }

  nextUint64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return z ^ (z >> 31n);
  }

  /** Uniform float in [0, 1) with 53 bits of entropy. */
  nextFloat(): number {
    return Number(this.nextUint64() >> 11n) / 2 ** 53;
  }

  /** Uniform integer in [0, n). */
  nextBelow(n: number): number {
    if (n <= 0) throw new RangeError("nextBelow needs n > 0");
    return Number(this.nextUint64() % BigInt(n));
  }

  /** Standard normal via Box-Muller. */
  nextGaussian(): number {
    const u = Math.max(this.nextFloat(), Number.MIN_VALUE);
    const v = this.nextFloat();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  /** In-place Fisher-Yates shuffle. */
  shuffle<T>(items: T[]): T[] {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.nextBelow(i + 1);
      const tmp = items[i]!;
      items[i] = items[j]!;
      items[j] = tmp;
    }
    return items;
  }
}

/** Stable 64-bit FNV-1a hash for deriving per-item seeds from strings. */
export function hashString(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  for (let i = 0; i < text.length; i++) {
    h ^= BigInt(text.charCodeAt(i));
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}
