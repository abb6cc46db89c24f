import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_TRANSFORMER_ID, HASH_MODEL_ID } from "./encoders.js";
import { createServer } from "./server.js";

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .option("port", { type: "number", default: Number(process.env.PORT ?? 8080) })
    .option("host", { type: "string", default: process.env.HOST ?? "127.0.0.1" })
    .option("model", {
      type: "string",
      default: process.env.MODEL_ID ?? DEFAULT_TRANSFORMER_ID,
      describe: `default model id (use ${HASH_MODEL_ID} for the offline deterministic encoder)`,
    })
    .option("max-batch", { type: "number", default: Number(process.env.MAX_BATCH ?? 256) })
    .strict()
    .parse();

  let { app, registry } = createServer({
    defaultModel: argv.model,
    maxBatch: argv["max-batch"],
  });

  const state = await registry.ready();
  if (state.status === "failed" && argv.model !== HASH_MODEL_ID) {
    // no real encoder available (offline install); serve the deterministic
    // fallback rather than a permanently unhealthy endpoint
    console.warn(`model ${argv.model} failed to load: ${state.error}`);
    console.warn(`falling back to ${HASH_MODEL_ID}`);
    ({ app, registry } = createServer({
      defaultModel: HASH_MODEL_ID,
      maxBatch: argv["max-batch"],
    }));
    await registry.ready();
  }

  app.listen(argv.port, argv.host, () => {
    const ready = registry.defaultState();
    const model = ready.status === "ready" ? ready.encoder.id : registry.defaultModel;
    console.log(`embedding service on http://${argv.host}:${argv.port} (model: ${model})`);
  });
}

void main();
