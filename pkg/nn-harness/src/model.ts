import * as tf from "@tensorflow/tfjs";
import type { FilterBank } from "./kernels.js";

export interface ModelConfig {
  inputSize: number;
  filterCount: number;
  filterSide: number;
  seed: number;
  /** Pooling window and stride (square, equal); recorded in run output. */
  poolSize: number;
}

export const DEFAULT_POOL_SIZE = 2;

/**
 * Frozen-conv classifier: one non-trainable conv layer, max pooling, then a
 * trainable dense head of 64 ReLU units and a 2-unit softmax.
 */
export function buildModel(cfg: ModelConfig): tf.Sequential {
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [cfg.inputSize, cfg.inputSize, 1],
      filters: cfg.filterCount,
      kernelSize: cfg.filterSide,
      padding: "same",
      useBias: false,
      trainable: false,
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed }),
      name: "frozen_conv",
    }),
  );
  model.add(
    tf.layers.maxPooling2d({ poolSize: cfg.poolSize, strides: cfg.poolSize }),
  );
  model.add(tf.layers.flatten());
  model.add(
    tf.layers.dense({
      units: 64,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 1 }),
      biasInitializer: "zeros",
    }),
  );
  model.add(
    tf.layers.dense({
      units: 2,
      activation: "softmax",
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 2 }),
      biasInitializer: "zeros",
    }),
  );
  return model;
}

/** Overwrite the frozen conv layer with an exported IENEO filter bank. */
export function setConvFilters(model: tf.Sequential, bank: FilterBank): void {
  const layer = model.getLayer("frozen_conv");
  const { side, count } = bank.meta;
  // exported layout is [kernel, row, col]; tfjs wants [row, col, in, out]
  const w = tf.tidy(() =>
    tf
      .tensor3d(bank.weights, [count, side, side])
      .transpose([1, 2, 0])
      .reshape([side, side, 1, count]),
  );
  layer.setWeights([w]);
  w.dispose();
}

/** Current conv weights in export layout, for frozen-filter verification. */
export function getConvFilters(model: tf.Sequential): Float32Array {
  const layer = model.getLayer("frozen_conv");
  const w = layer.getWeights()[0]; // [side, side, 1, count]
  const [side, , , count] = w.shape as [number, number, number, number];
  const out = tf.tidy(() =>
    w.reshape([side, side, count]).transpose([2, 0, 1]).reshape([count * side * side]),
  );
  const data = out.dataSync() as Float32Array;
  out.dispose();
  return new Float32Array(data);
}
