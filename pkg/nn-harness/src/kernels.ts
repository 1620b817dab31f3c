import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";

export interface KernelMeta {
  seed: number;
  count: number;
  side: number;
  ids: number[];
  l1_norms: number[];
  params: unknown[];
  sha256: string;
}

export interface FilterBank {
  meta: KernelMeta;
  /** Row-major [count, side, side], bit-exact as exported. */
  weights: Float32Array;
}

/**
 * Read a kernel export directory (meta.json + kernels.f32).
 *
 * The payload is little-endian float32, row-major, one side*side block per
 * kernel; it is rejected when its SHA-256 does not match meta.json or its
 * length disagrees with count * side * side.
 */
export function loadKernels(dir: string): FilterBank {
  const meta = JSON.parse(readFileSync(join(dir, "meta.json"), "utf-8")) as KernelMeta;
  const blob = readFileSync(join(dir, "kernels.f32"));
  const digest = createHash("sha256").update(blob).digest("hex");
  if (digest !== meta.sha256) {
    throw new Error(`kernel payload hash mismatch: ${digest} != ${meta.sha256}`);
  }
  const expected = meta.count * meta.side * meta.side * 4;
  if (blob.byteLength !== expected) {
    throw new Error(
      `kernel payload is ${blob.byteLength} bytes, expected ${expected} for side ${meta.side}`,
    );
  }
  const weights = new Float32Array(blob.buffer, blob.byteOffset, expected / 4).slice();
  return { meta, weights };
}
