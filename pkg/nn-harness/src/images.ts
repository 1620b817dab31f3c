import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

export interface RawImage {
  width: number;
  height: number;
  values: Float32Array;
}

/** Read one raw little-endian float32 row-major image plus its JSON sidecar. */
export function loadRawF32(path: string): RawImage {
  const side = JSON.parse(readFileSync(path + ".json", "utf-8")) as {
    width: number;
    height: number;
  };
  const blob = readFileSync(path);
  const expected = side.width * side.height * 4;
  if (blob.byteLength !== expected) {
    throw new Error(`raw payload is ${blob.byteLength} bytes, expected ${expected}`);
  }
  const values = new Float32Array(blob.buffer, blob.byteOffset, expected / 4).slice();
  return { width: side.width, height: side.height, values };
}

export interface LabeledImages {
  images: RawImage[];
  labels: number[];
}

/**
 * Read a dataset directory: labels.json maps image file names to integer
 * labels; each name refers to a raw-f32 file with a sidecar next to it.
 */
export function loadDataset(dir: string): LabeledImages {
  const entries = JSON.parse(readFileSync(join(dir, "labels.json"), "utf-8")) as {
    file: string;
    label: number;
  }[];
  const images = entries.map((e) => loadRawF32(join(dir, e.file)));
  return { images, labels: entries.map((e) => e.label) };
}

export function listRawImages(dir: string): string[] {
  return readdirSync(dir)
    .filter((f) => f.endsWith(".f32"))
    .sort();
}
