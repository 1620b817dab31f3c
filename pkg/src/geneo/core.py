"""Shared domain types: grids, diagrams, kernels, isometries, datasets.

All types are immutable after construction (arrays are frozen) and carry a
canonical JSON form.  Validation never raises: `validate` returns the list of
violated invariants so callers can decide what to do with bad data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

_A_NORM_TOL = 1e-9
_KERNEL_L1_TOL = 1e-12
_KERNEL_SYM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# grid functions


@dataclass(frozen=True)
class GridFunction:
    """A bounded measurement sampled on a rectangular pixel grid.

    `values` has shape (height, width), row-major, float64.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(np.atleast_2d(self.values)))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "values": [float(v) for v in self.values.ravel()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        w, h = int(obj["width"]), int(obj["height"])
        vals = np.asarray(obj["values"], dtype=np.float64).reshape(h, w)
        return cls(vals)


# ---------------------------------------------------------------------------
# persistence diagrams


@dataclass(frozen=True, order=True)
class DiagramPoint:
    birth: float
    death: float  # may be +inf
    multiplicity: int = 1


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of birth/death points for one homology degree.

    Finite-death points live in `points`, essential classes (death = +inf) in
    `essential`.  Diagonal points are implicit and never stored.  Points are
    kept sorted by (birth, death) with duplicates merged into multiplicities.
    """

    degree: int
    points: tuple[DiagramPoint, ...] = ()
    essential: tuple[DiagramPoint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", _canonical(self.points))
        object.__setattr__(self, "essential", _canonical(self.essential))

    @classmethod
    def from_pairs(cls, degree, finite_pairs, essential_births=()) -> "PersistenceDiagram":
        pts = [DiagramPoint(float(b), float(d)) for b, d in finite_pairs if d > b]
        ess = [DiagramPoint(float(b), INF) for b in essential_births]
        return cls(degree, tuple(pts), tuple(ess))

    def finite_pairs(self) -> list[tuple[float, float]]:
        """Finite points with multiplicities expanded."""
        out = []
        for p in self.points:
            out.extend([(p.birth, p.death)] * p.multiplicity)
        return out

    def essential_births(self) -> list[float]:
        out = []
        for p in self.essential:
            out.extend([p.birth] * p.multiplicity)
        return out

    def shifted(self, c: float) -> "PersistenceDiagram":
        return PersistenceDiagram(
            self.degree,
            tuple(DiagramPoint(p.birth + c, p.death + c, p.multiplicity) for p in self.points),
            tuple(DiagramPoint(p.birth + c, INF, p.multiplicity) for p in self.essential),
        )

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "points": [[p[0], p[1]] for p in self.finite_pairs()],
            "essential": self.essential_births(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PersistenceDiagram":
        for b, d in obj["points"]:
            if not d > b:
                raise ValueError(f"diagram point ({b}, {d}) has death <= birth")
        return cls.from_pairs(int(obj["degree"]), obj["points"], obj["essential"])


def _canonical(points) -> tuple[DiagramPoint, ...]:
    merged: dict[tuple[float, float], int] = {}
    for p in points:
        key = (p.birth, p.death)
        merged[key] = merged.get(key, 0) + p.multiplicity
    return tuple(
        DiagramPoint(b, d, m) for (b, d), m in sorted(merged.items())
    )


# ---------------------------------------------------------------------------
# operator parameters and kernels


@dataclass(frozen=True)
class IeneoParams:
    """A point on the unit-sphere-constrained parameter manifold.

    `a` are mixing weights, `tau` radial centers (both unit-normalized),
    `sigma` the Gaussian width in pixels, `support` the odd stencil side.
    """

    a: tuple[float, ...]
    tau: tuple[float, ...]
    sigma: float
    support: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "tau", tuple(float(x) for x in self.tau))

    @property
    def k(self) -> int:
        return len(self.a)

    def to_json(self) -> dict:
        return {
            "a": list(self.a),
            "tau": list(self.tau),
            "sigma": self.sigma,
            "support": self.support,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IeneoParams":
        return cls(tuple(obj["a"]), tuple(obj["tau"]), float(obj["sigma"]), int(obj["support"]))


@dataclass(frozen=True)
class Kernel:
    """Discrete radial stencil with L1-normalized weights.

    `weights` has shape (side, side); `l1_norm` is the pre-normalization sum
    of absolute raw values.
    """

    weights: np.ndarray
    l1_norm: float

    def __post_init__(self):
        object.__setattr__(self, "weights", _freeze(self.weights))

    @property
    def side(self) -> int:
        return self.weights.shape[0]

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "weights": [float(v) for v in self.weights.ravel()],
            "l1_norm": self.l1_norm,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Kernel":
        s = int(obj["side"])
        return cls(np.asarray(obj["weights"], dtype=np.float64).reshape(s, s), float(obj["l1_norm"]))


# ---------------------------------------------------------------------------
# grid isometries

_ROTATIONS = (0, 90, 180, 270)

# 2x2 rotation matrices for the four right angles, (x, y) column convention
_ROT_MAT = {
    0: np.array([[1, 0], [0, 1]]),
    90: np.array([[0, -1], [1, 0]]),
    180: np.array([[-1, 0], [0, -1]]),
    270: np.array([[0, 1], [-1, 0]]),
}
_MIRROR = np.array([[-1, 0], [0, 1]])  # flip about the vertical axis


@dataclass(frozen=True)
class GridIsometry:
    """A plane isometry that maps the pixel lattice to itself.

    Acts on centered coordinates q as q -> R(rotation) M^reflect q + shift,
    where M flips about the vertical axis.  The mirror is applied before the
    rotation.
    """

    rotation: int = 0
    reflect: bool = False
    shift: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.rotation not in _ROTATIONS:
            raise ValueError(f"rotation must be one of {_ROTATIONS}")
        object.__setattr__(self, "shift", (int(self.shift[0]), int(self.shift[1])))

    @property
    def matrix(self) -> np.ndarray:
        m = _ROT_MAT[self.rotation]
        return m @ _MIRROR if self.reflect else m

    def compose(self, other: "GridIsometry") -> "GridIsometry":
        """self after other: x -> self(other(x))."""
        r2 = other.rotation if not self.reflect else (-other.rotation) % 360
        rot = (self.rotation + r2) % 360
        t = self.matrix @ np.asarray(other.shift) + np.asarray(self.shift)
        return GridIsometry(rot, self.reflect ^ other.reflect, (int(t[0]), int(t[1])))

    def inverse(self) -> "GridIsometry":
        rot = (-self.rotation) % 360 if not self.reflect else self.rotation
        inv_lin = GridIsometry(rot, self.reflect)
        t = -(inv_lin.matrix @ np.asarray(self.shift))
        return GridIsometry(rot, self.reflect, (int(t[0]), int(t[1])))

    @staticmethod
    def identity() -> "GridIsometry":
        return GridIsometry()

    @staticmethod
    def dihedral4() -> list["GridIsometry"]:
        """The eight rotation/reflection symmetries of the square grid."""
        return [GridIsometry(r, m) for m in (False, True) for r in _ROTATIONS]

    def to_json(self) -> dict:
        return {"rotation": self.rotation, "reflect": self.reflect, "shift": list(self.shift)}

    @classmethod
    def from_json(cls, obj: dict) -> "GridIsometry":
        return cls(int(obj["rotation"]), bool(obj["reflect"]), tuple(obj["shift"]))


def apply_isometry(g: GridIsometry, f: GridFunction) -> GridFunction:
    """Compute f∘g on the grid of f: output(x) = f(g(x)), zero outside.

    Pure 90-degree rotations and axis reflections of square grids are exact
    pixel permutations; shifts move content with zero fill.
    """
    h, w = f.values.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    q = np.stack([cols - cx, rows - cy])  # centered (x, y) per output pixel
    m = g.matrix
    gx = m[0, 0] * q[0] + m[0, 1] * q[1] + g.shift[0] + cx
    gy = m[1, 0] * q[0] + m[1, 1] * q[1] + g.shift[1] + cy
    xi = np.rint(gx).astype(np.int64)
    yi = np.rint(gy).astype(np.int64)
    if not (np.allclose(gx, xi, atol=1e-9) and np.allclose(gy, yi, atol=1e-9)):
        raise ValueError("isometry is not grid-exact on this domain (non-square grid rotation?)")
    inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
    out = np.zeros_like(f.values)
    out[inside] = f.values[yi[inside], xi[inside]]
    return GridFunction(out)


def is_group(elements: list[GridIsometry]) -> bool:
    """Check closure under composition and inverse on the canonical form."""
    pool = set(elements)
    if GridIsometry.identity() not in pool:
        return False
    for g in elements:
        if g.inverse() not in pool:
            return False
        for h in elements:
            if g.compose(h) not in pool:
                return False
    return True


# ---------------------------------------------------------------------------
# operator sets, datasets, matrices, dendrograms

STATUS_CANDIDATE = "candidate"
STATUS_SELECTED = "selected"
STATUS_SAMPLED_OUT = "sampled-out"
_STATUSES = (STATUS_CANDIDATE, STATUS_SELECTED, STATUS_SAMPLED_OUT)


@dataclass(frozen=True)
class OperatorSet:
    """Ordered collection of realized IENEOs with provenance."""

    operators: tuple[tuple[int, IeneoParams, Kernel], ...]
    seed: int
    status: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "status", tuple(self.status))

    def __len__(self) -> int:
        return len(self.operators)

    def ids(self) -> list[int]:
        return [op[0] for op in self.operators]

    def kernels(self) -> list[Kernel]:
        return [op[2] for op in self.operators]

    def subset(self, keep_ids, new_status: str) -> "OperatorSet":
        keep = set(keep_ids)
        ops, st = [], []
        for (oid, p, k), s in zip(self.operators, self.status):
            if oid in keep:
                ops.append((oid, p, k))
                st.append(new_status)
        return OperatorSet(tuple(ops), self.seed, tuple(st))

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "operators": [
                {"id": oid, "params": p.to_json(), "kernel": k.to_json(), "status": s}
                for (oid, p, k), s in zip(self.operators, self.status)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OperatorSet":
        ops, st = [], []
        for rec in obj["operators"]:
            ops.append((int(rec["id"]), IeneoParams.from_json(rec["params"]), Kernel.from_json(rec["kernel"])))
            st.append(rec["status"])
        return cls(tuple(ops), int(obj["seed"]), tuple(st))


@dataclass(frozen=True)
class LabeledDataset:
    samples: tuple[GridFunction, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "labels", tuple(int(l) for l in self.labels))

    def __len__(self) -> int:
        return len(self.samples)

    def classes(self) -> list[int]:
        return sorted(set(self.labels))

    def by_class(self) -> dict[int, list[GridFunction]]:
        out: dict[int, list[GridFunction]] = {}
        for f, l in zip(self.samples, self.labels):
            out.setdefault(l, []).append(f)
        return out


@dataclass(frozen=True)
class DistanceMatrix:
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _freeze(np.atleast_2d(self.entries)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_json(self) -> dict:
        return {"n": self.n, "entries": [float(v) for v in self.entries.ravel()]}

    @classmethod
    def from_json(cls, obj: dict) -> "DistanceMatrix":
        n = int(obj["n"])
        return cls(np.asarray(obj["entries"], dtype=np.float64).reshape(n, n))


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge tree: leaves are 0..n-1, merge i creates node n+i."""

    merges: tuple[tuple[int, int, float], ...]
    leaf_labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "merges", tuple((int(a), int(b), float(h)) for a, b, h in self.merges)
        )
        object.__setattr__(self, "leaf_labels", tuple(int(l) for l in self.leaf_labels))

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_labels)

    def to_json(self) -> dict:
        return {
            "merges": [[a, b, h] for a, b, h in self.merges],
            "leaf_labels": list(self.leaf_labels),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dendrogram":
        return cls(tuple(tuple(m) for m in obj["merges"]), tuple(obj["leaf_labels"]))

    def to_newick(self) -> str:
        n = self.n_leaves
        names: dict[int, str] = {i: f"L{i}" for i in range(n)}
        heights = {i: 0.0 for i in range(n)}
        for i, (a, b, h) in enumerate(self.merges):
            la = h - heights[a]
            lb = h - heights[b]
            names[n + i] = f"({names[a]}:{la:.12g},{names[b]}:{lb:.12g})"
            heights[n + i] = h
        root = n + len(self.merges) - 1 if self.merges else 0
        return names[root] + ";"


# ---------------------------------------------------------------------------
# validation


def validate(obj) -> list[str]:
    """Return the list of violated invariants (empty means valid)."""
    v: list[str] = []
    if isinstance(obj, GridFunction):
        if obj.values.ndim != 2 or obj.values.size == 0:
            v.append("values must form a non-empty width×height grid")
        if not np.all(np.isfinite(obj.values)):
            v.append("values contain NaN or Inf")
    elif isinstance(obj, DiagramPoint):
        if not obj.birth <= obj.death:
            v.append("birth>death")
        if obj.multiplicity < 1:
            v.append("multiplicity must be >= 1")
        if math.isinf(obj.birth):
            v.append("birth must be finite")
    elif isinstance(obj, PersistenceDiagram):
        if obj.degree < 0:
            v.append("degree must be >= 0")
        for p in obj.points:
            v.extend(validate(p))
            if math.isinf(p.death):
                v.append("finite-point list contains an essential point")
            if p.birth == p.death:
                v.append("diagonal point stored explicitly")
        for p in obj.essential:
            if not math.isinf(p.death):
                v.append("essential point with finite death")
            if p.multiplicity < 1:
                v.append("multiplicity must be >= 1")
    elif isinstance(obj, IeneoParams):
        if len(obj.a) != len(obj.tau) or len(obj.a) == 0:
            v.append("a and tau must have equal positive length k")
        if abs(sum(x * x for x in obj.a) - 1.0) > _A_NORM_TOL:
            v.append("Σa²≠1")
        if abs(sum(x * x for x in obj.tau) - 1.0) > _A_NORM_TOL:
            v.append("Στ²≠1")
        if not obj.sigma > 0:
            v.append("sigma must be > 0")
        if obj.support < 3 or obj.support % 2 == 0:
            v.append("support must be odd and >= 3")
    elif isinstance(obj, Kernel):
        if obj.weights.ndim != 2 or obj.weights.shape[0] != obj.weights.shape[1]:
            v.append("weights must be square")
        elif obj.side % 2 == 0:
            v.append("side must be odd")
        else:
            if abs(np.abs(obj.weights).sum() - 1.0) > _KERNEL_L1_TOL:
                v.append("Σ|weights|≠1")
            w = obj.weights
            for sym in (np.fliplr(w), np.flipud(w), w.T, np.rot90(w)):
                if np.abs(w - sym).max() > _KERNEL_SYM_TOL:
                    v.append("weights not radially symmetric under square symmetries")
                    break
        if not obj.l1_norm > 0:
            v.append("l1_norm must be > 0")
    elif isinstance(obj, GridIsometry):
        if obj.rotation not in _ROTATIONS:
            v.append("rotation must be a right angle")
    elif isinstance(obj, OperatorSet):
        ids = obj.ids()
        if ids != list(range(len(ids))):
            v.append("operator ids must be unique and dense from 0")
        if len(obj.status) != len(obj.operators):
            v.append("status list length mismatch")
        for s in obj.status:
            if s not in _STATUSES:
                v.append(f"unknown status {s!r}")
        for _, p, k in obj.operators:
            v.extend(validate(p))
            v.extend(validate(k))
    elif isinstance(obj, LabeledDataset):
        if len(obj.samples) != len(obj.labels):
            v.append("samples and labels must have equal length")
        if any(l < 0 for l in obj.labels):
            v.append("labels must be non-negative")
        for f in obj.samples:
            v.extend(validate(f))
    elif isinstance(obj, DistanceMatrix):
        e = obj.entries
        if e.shape[0] != e.shape[1]:
            v.append("matrix must be square")
        else:
            if np.abs(e - e.T).max() > 1e-12:
                v.append("matrix not symmetric within 1e-12")
            if np.abs(np.diag(e)).max() > 0:
                v.append("diagonal must be zero")
            if e.min() < 0:
                v.append("entries must be >= 0")
    elif isinstance(obj, Dendrogram):
        n = obj.n_leaves
        if len(obj.merges) != max(n - 1, 0):
            v.append("dendrogram must have n-1 merges for n leaves")
        heights = {i: 0.0 for i in range(n)}
        for i, (a, b, h) in enumerate(obj.merges):
            if h < 0:
                v.append("merge height must be >= 0")
            for c in (a, b):
                if c in heights and heights[c] > h + 1e-12:
                    v.append("heights must be non-decreasing along root paths")
            heights[n + i] = h
    else:
        v.append(f"unknown core type {type(obj).__name__}")
    return v
