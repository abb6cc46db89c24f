/**
 * HTTP surface: POST /embed and GET /health.
 *
 * Wire format: {"model": string, "texts": [string, ...]} in, and
 * {"dimension": int, "vectors": [[float, ...], ...]} out, vectors
 * unit-normalized and order-preserving. Status codes: 400 for empty
 * texts or a malformed body, 404 for an unknown model, 413 when the
 * batch exceeds the configured cap, 503 while a model is loading.
 */
import express, { type Express } from "express";
import { z } from "zod";

import { ModelRegistry, HASH_MODEL_ID } from "./encoders.js";

export interface ServerOptions {
  defaultModel?: string;
  maxBatch?: number;
  loadDelayMs?: number;
}

const embedRequestSchema = z.object({
  model: z.string().min(1),
  texts: z.array(z.string()).min(1),
});

export function createServer(options: ServerOptions = {}): {
  app: Express;
  registry: ModelRegistry;
} {
  const maxBatch = options.maxBatch ?? 256;
  const registry = new ModelRegistry(
    options.defaultModel ?? HASH_MODEL_ID,
    options.loadDelayMs ?? 0,
  );

  const app = express();
  app.use(express.json({ limit: "4mb" }));

  app.get("/health", (_req, res) => {
    const state = registry.defaultState();
    if (state.status === "ready") {
      res.json({
        status: "ok",
        model: state.encoder.id,
        dimension: state.encoder.dimension,
      });
      return;
    }
    const detail =
      state.status === "failed" ? { error: state.error } : {};
    res.status(503).json({ status: state.status, model: registry.defaultModel, ...detail });
  });

  app.post("/embed", (req, res) => {
    void (async () => {
      const parsed = embedRequestSchema.safeParse(req.body);
      if (!parsed.success) {
        res.status(400).json({ error: parsed.error.issues[0]?.message ?? "bad request" });
        return;
      }
      const { model, texts } = parsed.data;
      if (texts.some((t) => t.trim() === "")) {
        res.status(400).json({ error: "texts must be non-empty" });
        return;
      }
      if (texts.length > maxBatch) {
        res.status(413).json({ error: `batch exceeds the ${maxBatch}-text cap` });
        return;
      }
      const state = registry.resolve(model);
      if (!state) {
        res.status(404).json({ error: `unknown model: ${model}` });
        return;
      }
      if (state.status === "loading") {
        res.status(503).json({ error: `model ${model} is still loading` });
        return;
      }
      if (state.status === "failed") {
        res.status(503).json({ error: `model ${model} failed to load: ${state.error}` });
        return;
      }
      const vectors = await state.encoder.embedBatch(texts);
      res.json({ dimension: state.encoder.dimension, vectors });
    })().catch((error) => {
      res.status(500).json({ error: String(error) });
    });
  });

  return { app, registry };
}
