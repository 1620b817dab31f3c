import * as tf from "@tensorflow/tfjs";
import type { FilterBank } from "./kernels.js";
import type { LabeledImages } from "./images.js";
import {
  DEFAULT_POOL_SIZE,
  buildModel,
  getConvFilters,
  setConvFilters,
} from "./model.js";

export interface TrainConfig {
  epochs: number;
  seed: number;
  learningRate: number;
  batchSize: number;
  poolSize: number;
}

export const DEFAULT_TRAIN_CONFIG: Omit<TrainConfig, "epochs" | "seed"> = {
  learningRate: 0.001,
  batchSize: 8,
  poolSize: DEFAULT_POOL_SIZE,
};

export interface MetricsRow {
  epoch: number;
  arm: "ieneo" | "random";
  loss: number;
  accuracy: number;
}

export interface CompareResult {
  rows: MetricsRow[];
  /** Conv weights of each arm before and after training, export layout. */
  filtersBefore: { ieneo: Float32Array; random: Float32Array };
  filtersAfter: { ieneo: Float32Array; random: Float32Array };
  config: TrainConfig;
}

function toTensors(data: LabeledImages, classes: number[]) {
  const n = data.images.length;
  const size = data.images[0].width;
  const x = new Float32Array(n * size * size);
  for (let i = 0; i < n; i++) {
    if (data.images[i].width !== size || data.images[i].height !== size) {
      throw new Error("all images must share one square size");
    }
    x.set(data.images[i].values, i * size * size);
  }
  const y = new Float32Array(n * 2);
  for (let i = 0; i < n; i++) {
    const cls = classes.indexOf(data.labels[i]);
    if (cls < 0) throw new Error(`label ${data.labels[i]} outside binary set ${classes}`);
    y[i * 2 + cls] = 1;
  }
  return {
    xs: tf.tensor4d(x, [n, size, size, 1]),
    ys: tf.tensor2d(y, [n, 2]),
    size,
  };
}

async function evaluateArm(
  model: tf.Sequential,
  xs: tf.Tensor4D,
  ys: tf.Tensor2D,
): Promise<{ loss: number; accuracy: number }> {
  const [loss, acc] = model.evaluate(xs, ys) as tf.Scalar[];
  const out = { loss: (await loss.data())[0], accuracy: (await acc.data())[0] };
  loss.dispose();
  acc.dispose();
  return out;
}

/**
 * Train two identical architectures whose only difference is the frozen
 * conv bank: IENEO-initialized vs seeded Glorot-random.  Row `epoch = 0` is
 * the untrained head; row `epoch = e` follows e training epochs.  The same
 * seed always yields the same rows.
 */
export async function trainCompare(
  train: LabeledImages,
  val: LabeledImages,
  bank: FilterBank,
  cfg: TrainConfig,
): Promise<CompareResult> {
  const classes = [...new Set([...train.labels, ...val.labels])].sort((a, b) => a - b);
  if (classes.length !== 2) {
    throw new Error(`need exactly 2 classes, got {${classes}}`);
  }
  const tr = toTensors(train, classes);
  const va = toTensors(val, classes);

  const arms: { name: "ieneo" | "random"; model: tf.Sequential }[] = [];
  for (const name of ["ieneo", "random"] as const) {
    const model = buildModel({
      inputSize: tr.size,
      filterCount: bank.meta.count,
      filterSide: bank.meta.side,
      seed: cfg.seed,
      poolSize: cfg.poolSize,
    });
    if (name === "ieneo") setConvFilters(model, bank);
    model.compile({
      optimizer: tf.train.adam(cfg.learningRate),
      loss: "categoricalCrossentropy",
      metrics: ["accuracy"],
    });
    arms.push({ name, model });
  }

  const filtersBefore = {
    ieneo: getConvFilters(arms[0].model),
    random: getConvFilters(arms[1].model),
  };

  const rows: MetricsRow[] = [];
  for (const { name, model } of arms) {
    const initial = await evaluateArm(model, va.xs, va.ys);
    rows.push({ epoch: 0, arm: name, ...initial });
    for (let epoch = 1; epoch < cfg.epochs; epoch++) {
      await model.fit(tr.xs, tr.ys, {
        epochs: 1,
        batchSize: cfg.batchSize,
        shuffle: false,
        verbose: 0,
      });
      const m = await evaluateArm(model, va.xs, va.ys);
      rows.push({ epoch, arm: name, ...m });
    }
  }
  rows.sort((a, b) => a.epoch - b.epoch || a.arm.localeCompare(b.arm));

  const filtersAfter = {
    ieneo: getConvFilters(arms[0].model),
    random: getConvFilters(arms[1].model),
  };
  tr.xs.dispose();
  tr.ys.dispose();
  va.xs.dispose();
  va.ys.dispose();
  arms.forEach((a) => a.model.dispose());
  return { rows, filtersBefore, filtersAfter, config: cfg };
}

export function toCsv(rows: MetricsRow[]): string {
  const body = rows
    .map((r) => `${r.epoch},${r.arm},${r.loss},${r.accuracy}`)
    .join("\n");
  return `epoch,arm,loss,accuracy\n${body}\n`;
}
