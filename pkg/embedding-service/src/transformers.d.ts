/**
 * Minimal surface of the optional @huggingface/transformers dependency;
 * installed separately when serving a real sentence encoder.
 */
declare module "@huggingface/transformers" {
  export interface FeatureExtractionOutput {
    tolist(): number[][];
  }

  export type FeatureExtractor = (
    texts: string[],
    options: { pooling: "mean"; normalize: boolean },
  ) => Promise<FeatureExtractionOutput>;

  export function pipeline(
    task: "feature-extraction",
    model: string,
  ): Promise<FeatureExtractor>;
}
