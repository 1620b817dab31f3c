"""Command-line interface.

Exit codes: 0 ok, 1 invariant violation on input data, 2 usage error
(including diagram degree mismatch).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .core import (
    DistanceMatrix,
    GridIsometry,
    OperatorSet,
    PersistenceDiagram,
    validate,
)
from .datasets import load_raw_f32
from .diagram_metric import DegreeMismatchError, bottleneck
from .learn import cluster_average_linkage, cut_dendrogram
from .persistence import persistence_diagram
from .pipeline import PipelineConfig, export_kernels, load_kernel_export, run_pipeline


def _load_grid(path):
    f = load_raw_f32(path)
    problems = validate(f)
    if problems:
        for p in problems:
            click.echo(f"invariant violation: {p}", err=True)
        sys.exit(1)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """GENEO toolkit: persistence, diagram metrics, operator pipelines."""


@main.command("persistence")
@click.option("--degree", type=click.Choice(["0", "1"]), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def persistence_cmd(degree, in_path, out_path):
    """Sublevel persistence diagram of a raw-f32 grid image."""
    f = _load_grid(in_path)
    d = persistence_diagram(f, int(degree))
    Path(out_path).write_text(json.dumps(d.to_json(), sort_keys=True))


@main.command("bottleneck")
@click.argument("a", type=click.Path(exists=True))
@click.argument("b", type=click.Path(exists=True))
def bottleneck_cmd(a, b):
    """Bottleneck distance between two diagram JSON files."""
    try:
        d1 = PersistenceDiagram.from_json(json.loads(Path(a).read_text()))
        d2 = PersistenceDiagram.from_json(json.loads(Path(b).read_text()))
    except ValueError as e:
        click.echo(f"invariant violation: {e}", err=True)
        sys.exit(1)
    for d in (d1, d2):
        problems = validate(d)
        if problems:
            for p in problems:
                click.echo(f"invariant violation: {p}", err=True)
            sys.exit(1)
    try:
        click.echo(f"{bottleneck(d1, d2)!r}")
    except DegreeMismatchError as e:
        click.echo(str(e), err=True)
        sys.exit(2)


@main.command("dist")
@click.option("--metric", type=click.Choice(["phi", "dg", "dmatch"]), required=True)
@click.option("--operators", "operators_dir", type=click.Path(exists=True), default=None,
              help="kernel export directory (dmatch only)")
@click.option("--degree", type=int, default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.argument("images", nargs=-1, type=click.Path(exists=True))
def dist_cmd(metric, operators_dir, degree, out_path, csv_path, images):
    """Pairwise distance matrix over raw-f32 images."""
    from .learn import distance_matrix
    from .metrics import dist_phi, natural_pseudo_distance

    if len(images) < 2:
        raise click.UsageError("need at least two images")
    fs = [_load_grid(p) for p in images]
    n = len(fs)
    import numpy as np

    if metric == "dmatch":
        if operators_dir is None:
            raise click.UsageError("--operators is required for dmatch")
        opset = load_kernel_export(operators_dir)
        m = distance_matrix(fs, opset, degree)
    else:
        entries = np.zeros((n, n))
        group = GridIsometry.dihedral4()
        for i in range(n):
            for j in range(i + 1, n):
                if metric == "phi":
                    v = dist_phi(fs[i], fs[j])
                else:
                    v = natural_pseudo_distance(fs[i], fs[j], group)
                entries[i, j] = entries[j, i] = v
        m = DistanceMatrix(entries)
    text = json.dumps(m.to_json(), sort_keys=True)
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text)
    if csv_path:
        rows = "\n".join(",".join(f"{v!r}" for v in row) for row in m.entries.tolist())
        Path(csv_path).write_text(rows + "\n")


def _read_config(path) -> PipelineConfig:
    return PipelineConfig.model_validate(json.loads(Path(path).read_text()))


@main.command("select")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def select_cmd(config_path, out_dir):
    """Run dataset loading, candidate initialization, and selection only."""
    from .learn import select_operators
    from .pipeline import _load_dataset, _split, initialize_candidates
    from .core import LabeledDataset
    from .datasets import preprocess
    import numpy as np

    cfg = _read_config(config_path)
    rng = np.random.default_rng(cfg.seed)
    train, _ = _split(_load_dataset(cfg.dataset), cfg, rng)
    train = LabeledDataset(tuple(preprocess(f, cfg.resize_to) for f in train.samples), train.labels)
    candidates = initialize_candidates(cfg)
    report = select_operators(candidates, train, cfg.eps, cfg.degree)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "selection.json").write_text(json.dumps(report.to_json(), sort_keys=True, indent=1))
    click.echo(f"selected {len(report.selected_ids)} / {len(candidates)}")


@main.command("sample")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def sample_cmd(config_path, out_dir):
    """Run selection followed by redundancy sampling."""
    from .core import LabeledDataset, STATUS_SELECTED
    from .datasets import preprocess
    from .learn import sample_operators, select_operators
    from .pipeline import _load_dataset, _split, initialize_candidates
    import numpy as np

    cfg = _read_config(config_path)
    rng = np.random.default_rng(cfg.seed)
    train, _ = _split(_load_dataset(cfg.dataset), cfg, rng)
    train = LabeledDataset(tuple(preprocess(f, cfg.resize_to) for f in train.samples), train.labels)
    candidates = initialize_candidates(cfg)
    selection = select_operators(candidates, train, cfg.eps, cfg.degree)
    selected = candidates.subset(selection.selected_ids, STATUS_SELECTED)
    report = sample_operators(
        selected, train, cfg.t_percentile, cfg.degree,
        s_max={oid: selection.s_max(oid) for oid in selected.ids()},
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "selection.json").write_text(json.dumps(selection.to_json(), sort_keys=True, indent=1))
    (out / "sampling.json").write_text(json.dumps(report.to_json(), sort_keys=True, indent=1))
    click.echo(f"surviving {len(report.surviving_ids)} / {len(candidates)}")


@main.command("cluster")
@click.option("--matrix", "matrix_path", type=click.Path(exists=True), required=True)
@click.option("--labels", required=True, help="comma-separated integer labels")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--cut", "cut_k", type=int, default=None, help="also report a k-cluster cut")
def cluster_cmd(matrix_path, labels, out_path, cut_k):
    """Average-linkage dendrogram of a distance matrix JSON."""
    m = DistanceMatrix.from_json(json.loads(Path(matrix_path).read_text()))
    problems = validate(m)
    if problems:
        for p in problems:
            click.echo(f"invariant violation: {p}", err=True)
        sys.exit(1)
    lab = [int(x) for x in labels.split(",")]
    dend = cluster_average_linkage(m, lab)
    Path(out_path).write_text(json.dumps(dend.to_json(), sort_keys=True))
    Path(str(out_path) + ".newick").write_text(dend.to_newick() + "\n")
    if cut_k:
        cut = cut_dendrogram(dend, cut_k)
        click.echo(f"purity@k={cut_k}: {cut.purity!r}")


@main.command("export-kernels")
@click.argument("operators_json", type=click.Path(exists=True))
@click.argument("out_dir", type=click.Path())
@click.option("--only-selected", is_flag=True, help="export only status=selected")
def export_kernels_cmd(operators_json, out_dir, only_selected):
    """Export an operator set to meta.json + kernels.f32."""
    opset = OperatorSet.from_json(json.loads(Path(operators_json).read_text()))
    if only_selected:
        keep = [oid for oid, s in zip(opset.ids(), opset.status) if s == "selected"]
        opset = opset.subset(keep, "selected")
    meta = export_kernels(opset, out_dir)
    click.echo(f"exported {meta['count']} kernels (sha256 {meta['sha256'][:12]}…)")


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def run_cmd(config_path, out_dir):
    """Full pipeline: preprocess, select, sample, cluster, export."""
    manifest = run_pipeline(_read_config(config_path), out_dir)
    click.echo(json.dumps(manifest["stages"], sort_keys=True))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
