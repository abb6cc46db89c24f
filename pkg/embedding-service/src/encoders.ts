/**
 * Text encoders and the model registry.
 *
 * Every encoder returns unit-norm vectors, deterministically for a fixed
 * model id and input text. The built-in hash encoder needs no downloads:
 * each whitespace token is hashed to a pseudo-random direction, token
 * vectors are averaged and renormalized. Real sentence encoders load
 * through transformers.js when the optional dependency is installed.
 */
import { createHash } from "node:crypto";

export interface Encoder {
  readonly id: string;
  readonly dimension: number;
  embedBatch(texts: string[]): Promise<number[][]>;
}

/** Unit-normalize in place; an all-zero vector stays zero. */
export function normalize(vector: number[]): number[] {
  let sum = 0;
  for (const x of vector) sum += x * x;
  const norm = Math.sqrt(sum);
  if (norm < 1e-12) return vector.map(() => 0);
  return vector.map((x) => x / norm);
}

export function cosine(a: number[], b: number[]): number {
  let dot = 0;
  for (let i = 0; i < a.length; i++) dot += a[i] * b[i];
  return dot;
}

/** xorshift128+ seeded from a SHA-256 digest; stable across platforms. */
class SeededRandom {
  private s0: bigint;
  private s1: bigint;
  private static readonly MASK = (1n << 64n) - 1n;

  constructor(seed: Buffer) {
    this.s0 = seed.readBigUInt64LE(0) | 1n;
    this.s1 = seed.readBigUInt64LE(8) | 1n;
  }

  private next(): bigint {
    let x = this.s0;
    const y = this.s1;
    this.s0 = y;
    x = (x ^ ((x << 23n) & SeededRandom.MASK)) & SeededRandom.MASK;
    x = x ^ (x >> 17n) ^ y ^ (y >> 26n);
    this.s1 = x & SeededRandom.MASK;
    return (this.s1 + y) & SeededRandom.MASK;
  }

  /** Uniform in (0, 1). */
  uniform(): number {
    return (Number(this.next() >> 11n) + 1) / 9007199254740994;
  }

  /** Standard normal via Box-Muller. */
  gaussian(): number {
    const u = this.uniform();
    const v = this.uniform();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}

export class HashEncoder implements Encoder {
  readonly id: string;
  readonly dimension: number;
  private readonly tokenCache = new Map<string, number[]>();

  constructor(id = "hash-384", dimension = 384) {
    this.id = id;
    this.dimension = dimension;
  }

  private tokenVector(token: string): number[] {
    let vec = this.tokenCache.get(token);
    if (!vec) {
      const digest = createHash("sha256").update(`${this.id}:${token}`).digest();
      const rng = new SeededRandom(digest);
      vec = normalize(Array.from({ length: this.dimension }, () => rng.gaussian()));
      this.tokenCache.set(token, vec);
    }
    return vec;
  }

  async embedBatch(texts: string[]): Promise<number[][]> {
    return texts.map((text) => {
      const tokens = text.split(/\s+/).filter(Boolean);
      const acc = new Array<number>(this.dimension).fill(0);
      for (const token of tokens) {
        const tv = this.tokenVector(token);
        for (let i = 0; i < this.dimension; i++) acc[i] += tv[i];
      }
      for (let i = 0; i < this.dimension; i++) acc[i] /= tokens.length;
      return normalize(acc);
    });
  }
}

/** Sentence encoder backed by transformers.js (optional dependency). */
class TransformerEncoder implements Encoder {
  constructor(
    readonly id: string,
    readonly dimension: number,
    private readonly pipe: (texts: string[]) => Promise<number[][]>,
  ) {}

  async embedBatch(texts: string[]): Promise<number[][]> {
    const vectors = await this.pipe(texts);
    return vectors.map(normalize);
  }
}

async function loadTransformer(id: string): Promise<Encoder> {
  const mod = await import("@huggingface/transformers").catch(() => {
    throw new Error(
      "@huggingface/transformers is not installed; " +
        "run `npm install @huggingface/transformers` to serve real encoders",
    );
  });
  const extractor = await mod.pipeline("feature-extraction", id);
  const pipe = async (texts: string[]): Promise<number[][]> => {
    const output = await extractor(texts, { pooling: "mean", normalize: true });
    return output.tolist() as number[][];
  };
  const probe = await pipe(["dimension probe"]);
  return new TransformerEncoder(id, probe[0].length, pipe);
}

export type ModelState =
  | { status: "loading" }
  | { status: "ready"; encoder: Encoder }
  | { status: "failed"; error: string };

// ids that name the same public MiniLM sentence encoder
const TRANSFORMER_ALIASES: Record<string, string> = {
  "all-MiniLM-L6-v2": "Xenova/all-MiniLM-L6-v2",
  "sentence-transformers/all-MiniLM-L6-v2": "Xenova/all-MiniLM-L6-v2",
  "Xenova/all-MiniLM-L6-v2": "Xenova/all-MiniLM-L6-v2",
};

const HASH_ALIASES = new Set(["hash-384", "test-hash"]);

export const DEFAULT_TRANSFORMER_ID = "Xenova/all-MiniLM-L6-v2";
export const HASH_MODEL_ID = "hash-384";

function canonicalId(id: string): string | undefined {
  if (HASH_ALIASES.has(id)) return HASH_MODEL_ID;
  return TRANSFORMER_ALIASES[id];
}

/**
 * Known models and their load state. Loading starts eagerly for the
 * default model and lazily for others; requests observe "loading" until
 * the encoder resolves. An artificial delay makes the loading phase
 * observable in tests.
 */
export class ModelRegistry {
  private readonly states = new Map<string, ModelState>();

  constructor(
    readonly defaultModel: string,
    private readonly loadDelayMs = 0,
  ) {
    const canonical = canonicalId(defaultModel);
    if (!canonical) throw new Error(`unknown default model: ${defaultModel}`);
    this.startLoading(canonical);
  }

  private startLoading(canonical: string): ModelState {
    const state: ModelState = { status: "loading" };
    this.states.set(canonical, state);
    void this.load(canonical);
    return state;
  }

  private async load(canonical: string): Promise<void> {
    try {
      if (this.loadDelayMs > 0) {
        await new Promise((resolve) => setTimeout(resolve, this.loadDelayMs));
      }
      const encoder =
        canonical === HASH_MODEL_ID
          ? new HashEncoder()
          : await loadTransformer(canonical);
      this.states.set(canonical, { status: "ready", encoder });
    } catch (error) {
      this.states.set(canonical, {
        status: "failed",
        error: error instanceof Error ? error.message : String(error),
      });
    }
  }

  /** State for a requested model id; undefined when the id is unknown. */
  resolve(id: string): ModelState | undefined {
    const canonical = canonicalId(id);
    if (!canonical) return undefined;
    return this.states.get(canonical) ?? this.startLoading(canonical);
  }

  defaultState(): ModelState {
    return this.resolve(this.defaultModel)!;
  }

  /** Resolves when the default model leaves the loading state. */
  async ready(): Promise<ModelState> {
    for (;;) {
      const state = this.defaultState();
      if (state.status !== "loading") return state;
      await new Promise((resolve) => setTimeout(resolve, 5));
    }
  }
}
