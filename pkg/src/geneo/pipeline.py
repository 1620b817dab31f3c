"""End-to-end run: preprocess, initialize, select, sample, cluster, export.

Every artifact write is deterministic given (config, seed); the manifest
records seeds, versions and content hashes so a rerun can be verified
byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .core import (
    GridFunction,
    LabeledDataset,
    OperatorSet,
    STATUS_CANDIDATE,
    STATUS_SAMPLED_OUT,
    STATUS_SELECTED,
)
from .datasets import load_cifar10, load_idx_dataset, load_sklearn_digits, preprocess, resize
from .learn import (
    DiagramCache,
    augment,
    cluster_average_linkage,
    cut_dendrogram,
    distance_matrix,
    sample_operators,
    select_operators,
)
from .operators import sample_operator


class DatasetConfig(BaseModel):
    source: str = "digits"  # "idx" | "cifar10" | "digits"
    images_path: str | None = None
    labels_path: str | None = None
    path: str | None = None


class PipelineConfig(BaseModel):
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    classes: tuple[int, int] = (5, 7)
    per_class: int = 20
    val_per_class: int = 10
    n_candidates: int = 500
    support: int = 11
    k: int | None = None  # default: round-half-up of support/2 + 1
    sigma_range: tuple[float, float] | None = None
    eps: float = 1.5
    t_percentile: float = 75.0
    degree: int = 1
    resize_to: int = 128
    seed: int = 0
    augment_validation: bool = False


def _load_dataset(cfg: DatasetConfig) -> LabeledDataset:
    if cfg.source == "idx":
        if not cfg.images_path or not cfg.labels_path:
            raise ValueError("idx source needs images_path and labels_path")
        return load_idx_dataset(cfg.images_path, cfg.labels_path)
    if cfg.source == "cifar10":
        if not cfg.path:
            raise ValueError("cifar10 source needs path")
        return load_cifar10(cfg.path)
    if cfg.source == "digits":
        return load_sklearn_digits()
    raise ValueError(f"unknown dataset source {cfg.source!r}")


def _split(data: LabeledDataset, cfg: PipelineConfig, rng: np.random.Generator):
    """Deterministic per-class train/validation split."""
    train_s, train_l, val_s, val_l = [], [], [], []
    for label in cfg.classes:
        idx = [i for i, l in enumerate(data.labels) if l == label]
        need = cfg.per_class + cfg.val_per_class
        if len(idx) < need:
            raise ValueError(f"class {label} has {len(idx)} samples, need {need}")
        chosen = rng.choice(len(idx), size=need, replace=False)
        for j in chosen[: cfg.per_class]:
            train_s.append(data.samples[idx[j]])
            train_l.append(label)
        for j in chosen[cfg.per_class :]:
            val_s.append(data.samples[idx[j]])
            val_l.append(label)
    return LabeledDataset(tuple(train_s), tuple(train_l)), LabeledDataset(tuple(val_s), tuple(val_l))


def _operator_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((base_seed, index)).generate_state(1)[0])


def initialize_candidates(cfg: PipelineConfig) -> OperatorSet:
    """Realize the random candidate operator set for a config."""
    if cfg.n_candidates <= 0:
        raise ValueError("need at least one candidate operator")
    ops = []
    for i in range(cfg.n_candidates):
        p, k = sample_operator(
            _operator_seed(cfg.seed, i), cfg.support, cfg.k, cfg.sigma_range
        )
        ops.append((i, p, k))
    return OperatorSet(tuple(ops), cfg.seed, tuple([STATUS_CANDIDATE] * len(ops)))


# ---------------------------------------------------------------------------
# artifact writing


def _dump_json(path: Path, obj) -> str:
    text = json.dumps(obj, sort_keys=True, indent=1)
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def export_kernels(opset: OperatorSet, outdir) -> dict:
    """Write meta.json + kernels.f32 (little-endian float32, row-major)."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    blob = b"".join(k.weights.astype("<f4").tobytes() for k in opset.kernels())
    (out / "kernels.f32").write_bytes(blob)
    meta = {
        "seed": opset.seed,
        "count": len(opset),
        "side": opset.kernels()[0].side if len(opset) else 0,
        "ids": opset.ids(),
        "l1_norms": [k.l1_norm for k in opset.kernels()],
        "params": [p.to_json() for _, p, _ in opset.operators],
        "sha256": hashlib.sha256(blob).hexdigest(),
    }
    _dump_json(out / "meta.json", meta)
    return meta


def load_kernel_export(outdir) -> OperatorSet:
    """Read a kernel export back, verifying the payload hash."""
    from .core import Kernel
    from .core import IeneoParams

    out = Path(outdir)
    meta = json.loads((out / "meta.json").read_text())
    blob = (out / "kernels.f32").read_bytes()
    if hashlib.sha256(blob).hexdigest() != meta["sha256"]:
        raise ValueError("kernel payload hash mismatch")
    side = meta["side"]
    arr = np.frombuffer(blob, dtype="<f4").reshape(meta["count"], side, side)
    ops = []
    for i, (oid, pj) in enumerate(zip(meta["ids"], meta["params"])):
        p = IeneoParams.from_json(pj)
        w = arr[i].astype(np.float64)
        l1 = float(meta["l1_norms"][i])
        ops.append((oid, p, Kernel(w / np.abs(w).sum(), l1)))
    return OperatorSet(tuple(ops), meta["seed"], tuple([STATUS_SELECTED] * len(ops)))


def run_pipeline(cfg: PipelineConfig, outdir) -> dict:
    """Execute the full run and write artifacts; returns the manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.time()
    manifest: dict = {
        "version": __version__,
        "config": json.loads(cfg.model_dump_json()),
        "stages": {},
        "hashes": {},
    }

    rng = np.random.default_rng(cfg.seed)
    data = _load_dataset(cfg.dataset)
    train, val = _split(data, cfg, rng)
    train = LabeledDataset(
        tuple(preprocess(f, cfg.resize_to) for f in train.samples), train.labels
    )
    val_samples = list(val.samples)
    if cfg.augment_validation:
        # augment at working resolution before normalization: pixel shifts are
        # meant in output pixels, and the transforms' zero fill matches the
        # raw background, not the standardized one
        val_samples = [
            augment(resize(f, cfg.resize_to), _operator_seed(cfg.seed, 10_000_000 + i))
            for i, f in enumerate(val_samples)
        ]
    val = LabeledDataset(
        tuple(preprocess(f, cfg.resize_to) for f in val_samples), val.labels
    )
    manifest["stages"]["preprocess"] = {"train": len(train), "val": len(val)}

    candidates = initialize_candidates(cfg)
    cache = DiagramCache(candidates, list(train.samples), cfg.degree)

    selection = select_operators(candidates, train, cfg.eps, cfg.degree, cache=cache)
    selected = candidates.subset(selection.selected_ids, STATUS_SELECTED)
    manifest["stages"]["select"] = {
        "candidates": len(candidates),
        "selected": len(selected),
    }
    if len(selected) == 0:
        manifest["stages"]["select"]["error"] = "no operator passed selection"
        _finalize(out, manifest, t_start, partial=True)
        return manifest

    sampling = sample_operators(
        selected,
        train,
        cfg.t_percentile,
        cfg.degree,
        s_max={oid: selection.s_max(oid) for oid in selected.ids()},
        cache=cache,
    )
    surviving = selected.subset(sampling.surviving_ids, STATUS_SELECTED)
    manifest["stages"]["sample"] = {"surviving": len(surviving)}

    matrix = distance_matrix(list(val.samples), surviving, cfg.degree)
    dend = cluster_average_linkage(matrix, list(val.labels))
    cut = cut_dendrogram(dend, 2)
    manifest["stages"]["cluster"] = {"purity_k2": cut.purity}

    # operator statuses on the full candidate set
    status = []
    surviving_ids = set(surviving.ids())
    for oid in candidates.ids():
        if oid in surviving_ids:
            status.append(STATUS_SELECTED)
        elif oid in set(selection.selected_ids):
            status.append(STATUS_SAMPLED_OUT)
        else:
            status.append(STATUS_CANDIDATE)
    annotated = OperatorSet(candidates.operators, candidates.seed, tuple(status))

    manifest["hashes"]["operators.json"] = _dump_json(out / "operators.json", annotated.to_json())
    manifest["hashes"]["selection.json"] = _dump_json(out / "selection.json", selection.to_json())
    manifest["hashes"]["sampling.json"] = _dump_json(out / "sampling.json", sampling.to_json())
    manifest["hashes"]["distance_matrix.json"] = _dump_json(
        out / "distance_matrix.json", matrix.to_json()
    )
    csv_text = "\n".join(
        ",".join(f"{v!r}" for v in row) for row in matrix.entries.tolist()
    )
    (out / "distance_matrix.csv").write_text(csv_text + "\n")
    manifest["hashes"]["distance_matrix.csv"] = _hash_file(out / "distance_matrix.csv")
    manifest["hashes"]["dendrogram.json"] = _dump_json(out / "dendrogram.json", dend.to_json())
    (out / "dendrogram.newick").write_text(dend.to_newick() + "\n")
    manifest["hashes"]["dendrogram.newick"] = _hash_file(out / "dendrogram.newick")

    meta = export_kernels(surviving, out / "kernels")
    manifest["hashes"]["kernels/kernels.f32"] = meta["sha256"]
    manifest["hashes"]["kernels/meta.json"] = _hash_file(out / "kernels" / "meta.json")

    _finalize(out, manifest, t_start, partial=False)
    return manifest


def _finalize(out: Path, manifest: dict, t_start: float, partial: bool) -> None:
    manifest["partial"] = partial
    manifest["elapsed_seconds"] = round(time.time() - t_start, 3)
    body = {k: v for k, v in manifest.items() if k != "elapsed_seconds"}
    manifest["manifest_sha256"] = hashlib.sha256(
        json.dumps(body, sort_keys=True).encode()
    ).hexdigest()
    _dump_json(out / "manifest.json", manifest)
