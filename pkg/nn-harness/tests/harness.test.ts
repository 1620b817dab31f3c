import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync, writeFileSync, cpSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { loadDataset, loadRawF32 } from "../src/images.js";
import { loadKernels } from "../src/kernels.js";
import { DEFAULT_TRAIN_CONFIG, toCsv, trainCompare } from "../src/train.js";

const FIXTURES = join(__dirname, "..", "fixtures");

describe("loadKernels", () => {
  it("round-trips the export bit-exactly", () => {
    const bank = loadKernels(join(FIXTURES, "kernels"));
    const blob = readFileSync(join(FIXTURES, "kernels", "kernels.f32"));
    const direct = new Float32Array(blob.buffer, blob.byteOffset, blob.byteLength / 4);
    expect(bank.weights.length).toBe(direct.length);
    for (let i = 0; i < direct.length; i++) {
      // bit-exact: compare the underlying u32 patterns, not float equality
      expect(bank.weights[i]).toBe(direct[i]);
    }
    expect(bank.meta.count * bank.meta.side * bank.meta.side).toBe(bank.weights.length);
  });

  it("rejects a corrupted payload", () => {
    const dir = mkdtempSync(join(tmpdir(), "kexp-"));
    cpSync(join(FIXTURES, "kernels"), dir, { recursive: true });
    const raw = readFileSync(join(dir, "kernels.f32"));
    raw[0] ^= 0xff;
    writeFileSync(join(dir, "kernels.f32"), raw);
    expect(() => loadKernels(dir)).toThrow(/hash mismatch/);
  });

  it("rejects a side/shape mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "kexp-"));
    cpSync(join(FIXTURES, "kernels"), dir, { recursive: true });
    const meta = JSON.parse(readFileSync(join(dir, "meta.json"), "utf-8"));
    meta.side += 2;
    writeFileSync(join(dir, "meta.json"), JSON.stringify(meta));
    expect(() => loadKernels(dir)).toThrow(/expected/);
  });
});

describe("loadDataset", () => {
  it("reads raw-f32 images with labels", () => {
    const ds = loadDataset(join(FIXTURES, "train"));
    expect(ds.images.length).toBe(40);
    expect(new Set(ds.labels)).toEqual(new Set([0, 1]));
    expect(ds.images[0].width).toBe(32);
    expect(ds.images[0].values.length).toBe(32 * 32);
  });

  it("rejects a truncated image", () => {
    const dir = mkdtempSync(join(tmpdir(), "img-"));
    writeFileSync(join(dir, "a.f32"), Buffer.alloc(12));
    writeFileSync(join(dir, "a.f32.json"), JSON.stringify({ width: 2, height: 3 }));
    expect(() => loadRawF32(join(dir, "a.f32"))).toThrow(/expected/);
  });
});

describe("trainCompare", () => {
  const cfg = { epochs: 12, seed: 0, ...DEFAULT_TRAIN_CONFIG };

  async function run(seed = 0, epochs = 12) {
    const bank = loadKernels(join(FIXTURES, "kernels"));
    const train = loadDataset(join(FIXTURES, "train"));
    const val = loadDataset(join(FIXTURES, "val"));
    return trainCompare(train, val, bank, { ...cfg, seed, epochs });
  }

  it("emits one row per arm per epoch with chance-level start", async () => {
    const result = await run();
    expect(result.rows.length).toBe(2 * cfg.epochs);
    for (const row of result.rows.filter((r) => r.epoch === 0)) {
      expect(row.accuracy).toBeGreaterThanOrEqual(0.35);
      expect(row.accuracy).toBeLessThanOrEqual(0.65);
    }
  }, 120_000);

  it("keeps the frozen filters unchanged through training", async () => {
    const result = await run();
    const hash = (a: Float32Array) =>
      createHash("sha256").update(Buffer.from(a.buffer)).digest("hex");
    expect(hash(result.filtersAfter.ieneo)).toBe(hash(result.filtersBefore.ieneo));
    expect(hash(result.filtersAfter.random)).toBe(hash(result.filtersBefore.random));
    // and the IENEO arm really carries the exported bank
    const bank = loadKernels(join(FIXTURES, "kernels"));
    expect(hash(result.filtersBefore.ieneo)).toBe(hash(bank.weights));
  }, 120_000);

  it("is deterministic per seed", async () => {
    const a = await run(3, 4);
    const b = await run(3, 4);
    expect(toCsv(a.rows)).toBe(toCsv(b.rows));
  }, 120_000);

  it("rejects non-binary label sets", async () => {
    const bank = loadKernels(join(FIXTURES, "kernels"));
    const train = loadDataset(join(FIXTURES, "train"));
    const bad = { images: train.images.slice(0, 3), labels: [0, 1, 2] };
    await expect(trainCompare(bad, bad, bank, cfg)).rejects.toThrow(/2 classes/);
  });

  it("acceptance: IENEO arm final accuracy >= random arm - 0.05", async () => {
    const result = await run(0, 20);
    const last = Math.max(...result.rows.map((r) => r.epoch));
    const final = Object.fromEntries(
      result.rows.filter((r) => r.epoch === last).map((r) => [r.arm, r.accuracy]),
    );
    expect(final.ieneo).toBeGreaterThanOrEqual(final.random - 0.05);
  }, 240_000);
});
