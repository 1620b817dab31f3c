import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadDataset } from "./images.js";
import { loadKernels } from "./kernels.js";
import { DEFAULT_TRAIN_CONFIG, toCsv, trainCompare } from "./train.js";

const argv = yargs(hideBin(process.argv))
  .command("train", "run the frozen-filter comparison", (y) =>
    y
      .option("kernels", { type: "string", demandOption: true, describe: "kernel export dir" })
      .option("train-dir", { type: "string", demandOption: true })
      .option("val-dir", { type: "string", demandOption: true })
      .option("epochs", { type: "number", default: 20 })
      .option("seed", { type: "number", default: 0 })
      .option("learning-rate", { type: "number", default: DEFAULT_TRAIN_CONFIG.learningRate })
      .option("batch-size", { type: "number", default: DEFAULT_TRAIN_CONFIG.batchSize })
      .option("pool-size", { type: "number", default: DEFAULT_TRAIN_CONFIG.poolSize })
      .option("out", { type: "string", demandOption: true, describe: "metrics CSV path" }),
  )
  .demandCommand(1)
  .strict()
  .parseSync();

async function main() {
  const bank = loadKernels(argv.kernels as string);
  const train = loadDataset(argv["train-dir"] as string);
  const val = loadDataset(argv["val-dir"] as string);
  const result = await trainCompare(train, val, bank, {
    epochs: argv.epochs as number,
    seed: argv.seed as number,
    learningRate: argv["learning-rate"] as number,
    batchSize: argv["batch-size"] as number,
    poolSize: argv["pool-size"] as number,
  });
  writeFileSync(argv.out as string, toCsv(result.rows));
  const last = result.rows.filter((r) => r.epoch === Math.max(...result.rows.map((x) => x.epoch)));
  console.log(JSON.stringify({ config: result.config, final: last }));
}

main().catch((e) => {
  console.error(e.message ?? e);
  process.exit(1);
});
