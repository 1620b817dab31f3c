"""Dataset ingestion (IDX, CIFAR10 binary, raw float32) and preprocessing."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import GridFunction, LabeledDataset

IDX_MAGIC_IMAGES = 0x00000803
IDX_MAGIC_LABELS = 0x00000801

# binomial 3x3 blur, [1,2,1] x [1,2,1] / 16
_BLUR = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]) / 16.0

_CIFAR_RECORD = 3073
_LUMA = (0.299, 0.587, 0.114)  # ITU-R 601


class FormatError(ValueError):
    pass


def load_idx(path) -> np.ndarray:
    """Parse an IDX file: images -> (n, rows, cols) uint8, labels -> (n,)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise FormatError("truncated IDX header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == IDX_MAGIC_LABELS:
        ndim = 1
    elif magic == IDX_MAGIC_IMAGES:
        ndim = 3
    else:
        raise FormatError(f"bad IDX magic 0x{magic:08x}")
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise FormatError("truncated IDX dimension block")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    count = int(np.prod(dims))
    payload = raw[header:]
    if len(payload) < count:
        raise FormatError("truncated IDX payload")
    return np.frombuffer(payload[:count], dtype=np.uint8).reshape(dims)


def load_idx_dataset(images_path, labels_path) -> LabeledDataset:
    imgs = load_idx(images_path)
    labels = load_idx(labels_path)
    if imgs.ndim != 3:
        raise FormatError("images file does not contain image data")
    if labels.ndim != 1 or len(labels) != len(imgs):
        raise FormatError("label count does not match image count")
    samples = tuple(GridFunction(img.astype(np.float64)) for img in imgs)
    return LabeledDataset(samples, tuple(int(l) for l in labels))


def load_cifar10(path) -> LabeledDataset:
    """Parse a CIFAR10 binary batch; channels collapse to luminance grayscale."""
    raw = Path(path).read_bytes()
    if len(raw) == 0 or len(raw) % _CIFAR_RECORD != 0:
        raise FormatError("file size is not a multiple of 3073 bytes")
    n = len(raw) // _CIFAR_RECORD
    data = np.frombuffer(raw, dtype=np.uint8).reshape(n, _CIFAR_RECORD)
    labels = data[:, 0].astype(int)
    pixels = data[:, 1:].reshape(n, 3, 32, 32).astype(np.float64)
    gray = _LUMA[0] * pixels[:, 0] + _LUMA[1] * pixels[:, 1] + _LUMA[2] * pixels[:, 2]
    return LabeledDataset(tuple(GridFunction(g) for g in gray), tuple(labels))


def resize(f: GridFunction, size: int) -> GridFunction:
    """Bilinear resize to size x size (identity when already that size)."""
    import cv2

    if f.values.shape == (size, size):
        return f
    return GridFunction(
        cv2.resize(f.values, (size, size), interpolation=cv2.INTER_LINEAR)
    )


def preprocess(f: GridFunction, size: int = 128) -> GridFunction:
    """Bilinear resize to size x size, 3x3 binomial blur, standardize.

    The blur uses reflect padding so constant images stay constant; the
    standard deviation is floored at 1e-8, mapping constants to all zeros.
    """
    from scipy import ndimage

    v = resize(f, size).values
    v = ndimage.correlate(v, _BLUR, mode="reflect")
    std = float(v.std())
    v = (v - v.mean()) / max(std, 1e-8)
    return GridFunction(v)


# ---------------------------------------------------------------------------
# raw float32 interchange format


def save_raw_f32(path, f: GridFunction) -> None:
    p = Path(path)
    f.values.astype("<f4").tofile(p)
    sidecar = {"width": f.width, "height": f.height}
    Path(str(p) + ".json").write_text(json.dumps(sidecar))


def load_raw_f32(path) -> GridFunction:
    p = Path(path)
    sidecar = json.loads(Path(str(p) + ".json").read_text())
    w, h = int(sidecar["width"]), int(sidecar["height"])
    vals = np.fromfile(p, dtype="<f4")
    if vals.size != w * h:
        raise FormatError("raw payload size does not match sidecar dimensions")
    return GridFunction(vals.astype(np.float64).reshape(h, w))


def load_sklearn_digits() -> LabeledDataset:
    """Bundled 8x8 digit images; offline stand-in for MNIST-style input."""
    from sklearn.datasets import load_digits

    d = load_digits()
    samples = tuple(GridFunction(img.astype(np.float64)) for img in d.images)
    return LabeledDataset(samples, tuple(int(t) for t in d.target))
