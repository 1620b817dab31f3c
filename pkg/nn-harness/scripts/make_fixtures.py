"""Produce pinned harness fixtures from the primary toolkit.

Writes, under the given output directory:
  kernels/        kernel export (meta.json + kernels.f32) from a pipeline run
  train/, val/    raw-f32 images + sidecars + labels.json
  run/            the full pipeline artifact directory (for provenance)

Usage: python3 scripts/make_fixtures.py <outdir>
"""

import json
import shutil
import sys
from pathlib import Path

import numpy as np

from geneo.datasets import preprocess, save_raw_f32
from geneo.pipeline import DatasetConfig, PipelineConfig, _load_dataset, _split, run_pipeline

CONFIG = PipelineConfig(
    dataset=DatasetConfig(source="digits"),
    classes=(0, 1),
    per_class=20,
    val_per_class=10,
    n_candidates=60,
    support=7,
    resize_to=32,
    seed=0,
)


def write_split(samples, labels, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (f, label) in enumerate(zip(samples, labels)):
        name = f"img{i:03d}.f32"
        save_raw_f32(outdir / name, f)
        entries.append({"file": name, "label": int(label)})
    (outdir / "labels.json").write_text(json.dumps(entries, indent=1) + "\n")


def main(outdir: str) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    run_pipeline(CONFIG, out / "run")
    shutil.copytree(out / "run" / "kernels", out / "kernels", dirs_exist_ok=True)

    rng = np.random.default_rng(CONFIG.seed)
    data = _load_dataset(CONFIG.dataset)
    train, val = _split(data, CONFIG, rng)
    write_split(
        [preprocess(f, CONFIG.resize_to) for f in train.samples], train.labels, out / "train"
    )
    write_split(
        [preprocess(f, CONFIG.resize_to) for f in val.samples], val.labels, out / "val"
    )
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
