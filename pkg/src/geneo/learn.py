"""Operator selection and sampling, the learned metric, and clustering.

Selection keeps operators that see same-class samples as close; sampling
drops one member of every operator pair whose interclass contrastive score
falls below a percentile threshold.  Exact max-over-pairs bottleneck values
are computed with cheap lower/upper bounds to skip dominated pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import (
    Dendrogram,
    DistanceMatrix,
    GridFunction,
    GridIsometry,
    LabeledDataset,
    OperatorSet,
    PersistenceDiagram,
    apply_isometry,
)
from .diagram_metric import bottleneck, _essential_distance
from .operators import apply
from .persistence import persistence_diagram


# ---------------------------------------------------------------------------
# cached diagrams with cheap bottleneck bounds


@dataclass
class _DiagInfo:
    diagram: PersistenceDiagram
    ess: list[float]
    max_pers: float


def _info(d: PersistenceDiagram) -> _DiagInfo:
    pairs = d.finite_pairs()
    mp = max((dd - b for b, dd in pairs), default=0.0)
    return _DiagInfo(d, d.essential_births(), mp)


def _bounds(a: _DiagInfo, b: _DiagInfo) -> tuple[float, float]:
    """(lower, upper) bounds on bottleneck(a, b)."""
    ess = _essential_distance(a.ess, b.ess)
    lo = max(ess, abs(a.max_pers - b.max_pers) / 2.0)
    hi = max(ess, max(a.max_pers, b.max_pers) / 2.0)
    return lo, hi


def _exact_max(infos_pairs) -> float:
    """Exact max of bottleneck over (a, b) pairs, skipping dominated ones."""
    items = [(_bounds(a, b), a, b) for a, b in infos_pairs]
    if not items:
        return 0.0
    best = max(lo for (lo, _), _, _ in items)
    items.sort(key=lambda it: -it[0][1])
    for (lo, hi), a, b in items:
        if hi <= best:
            break
        best = max(best, bottleneck(a.diagram, b.diagram))
    return best


class DiagramCache:
    """Persistence diagrams of operator outputs, computed once per pair."""

    def __init__(self, opset: OperatorSet, samples: list[GridFunction], degree: int):
        self.opset = opset
        self.samples = list(samples)
        self.degree = degree
        self._kernels = {oid: k for oid, _, k in opset.operators}
        self._cache: dict[tuple[int, int], _DiagInfo] = {}

    def get(self, op_id: int, sample_idx: int) -> _DiagInfo:
        key = (op_id, sample_idx)
        if key not in self._cache:
            out = apply(self._kernels[op_id], self.samples[sample_idx])
            self._cache[key] = _info(persistence_diagram(out, self.degree))
        return self._cache[key]


# ---------------------------------------------------------------------------
# selection


@dataclass(frozen=True)
class SelectionReport:
    """Per-operator within-class spreads, the threshold, and survivors."""

    s_values: dict[int, dict[int, float]]  # op id -> class -> s_l
    eps: float
    selected_ids: tuple[int, ...]

    def s_max(self, op_id: int) -> float:
        return max(self.s_values[op_id].values())

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "selected_ids": list(self.selected_ids),
            "s_values": {str(k): {str(c): v for c, v in row.items()} for k, row in self.s_values.items()},
        }


def select_operators(
    candidates: OperatorSet,
    data: LabeledDataset,
    eps: float,
    degree: int = 1,
    cache: DiagramCache | None = None,
) -> SelectionReport:
    """Keep operators whose within-class spread is below eps for every class.

    s_l(F) is the max over unordered same-class sample pairs of the
    bottleneck distance between the diagrams of the operator outputs; the
    comparison with eps is strict.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    class_idx: dict[int, list[int]] = {}
    for i, l in enumerate(data.labels):
        class_idx.setdefault(l, []).append(i)
    for l, idx in class_idx.items():
        if len(idx) < 2:
            raise ValueError(f"class {l} has fewer than 2 samples")
    if cache is None:
        cache = DiagramCache(candidates, list(data.samples), degree)

    s_values: dict[int, dict[int, float]] = {}
    selected = []
    for oid in candidates.ids():
        row = {}
        for l, idx in sorted(class_idx.items()):
            infos = [cache.get(oid, i) for i in idx]
            row[l] = _exact_max(
                (infos[i], infos[j]) for i in range(len(infos)) for j in range(i + 1, len(infos))
            )
        s_values[oid] = row
        if all(v < eps for v in row.values()):
            selected.append(oid)
    return SelectionReport(s_values, eps, tuple(selected))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplingReport:
    """Pairwise operator distances, contrastive scores, and survivors."""

    delta: dict[tuple[int, int], dict[int, float]]  # pair -> class -> Delta^l
    scores: dict[tuple[int, int], int]
    threshold: float
    surviving_ids: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "surviving_ids": list(self.surviving_ids),
            "scores": {f"{p},{q}": s for (p, q), s in self.scores.items()},
            "delta": {
                f"{p},{q}": {str(c): v for c, v in row.items()}
                for (p, q), row in self.delta.items()
            },
        }


def _nearest_rank_percentile(values: list[float], pct: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    v = sorted(values)
    rank = int(np.ceil(pct / 100.0 * len(v)))
    rank = min(max(rank, 1), len(v))
    return v[rank - 1]


def sample_operators(
    selected: OperatorSet,
    data: LabeledDataset,
    t_percentile: float = 75.0,
    degree: int = 1,
    s_max: dict[int, float] | None = None,
    cache: DiagramCache | None = None,
) -> SamplingReport:
    """Drop redundant operators by interclass contrastive score.

    Per class, unordered operator pairs are ranked by ascending Delta^l (ties
    by pair id); a pair's score is the sum of its ranks over classes.  Pairs
    scoring strictly below the nearest-rank percentile threshold are
    redundant: walking them in ascending score, while both members are alive
    we drop the one with the larger worst-class spread (ties: larger id).
    """
    ids = selected.ids()
    if not ids:
        raise ValueError("empty operator set")
    if len(ids) == 1:
        return SamplingReport({}, {}, 0.0, tuple(ids))
    class_idx: dict[int, list[int]] = {}
    for i, l in enumerate(data.labels):
        class_idx.setdefault(l, []).append(i)
    if cache is None:
        cache = DiagramCache(selected, list(data.samples), degree)
    if s_max is None:
        rep = select_operators(selected, data, eps=float("inf"), degree=degree, cache=cache)
        s_max = {oid: rep.s_max(oid) for oid in ids}

    pairs = [(p, q) for i, p in enumerate(ids) for q in ids[i + 1 :]]
    delta: dict[tuple[int, int], dict[int, float]] = {pr: {} for pr in pairs}
    for l, idx in sorted(class_idx.items()):
        for p, q in pairs:
            delta[(p, q)][l] = _exact_max(
                (cache.get(p, i), cache.get(q, i)) for i in idx
            )

    scores: dict[tuple[int, int], int] = {pr: 0 for pr in pairs}
    for l in sorted(class_idx):
        ranked = sorted(pairs, key=lambda pr: (delta[pr][l], pr))
        for rank, pr in enumerate(ranked):
            scores[pr] += rank

    threshold = _nearest_rank_percentile([float(s) for s in scores.values()], t_percentile)
    redundant = sorted((pr for pr in pairs if scores[pr] < threshold), key=lambda pr: (scores[pr], pr))
    alive = set(ids)
    for p, q in redundant:
        if p in alive and q in alive:
            victim = max((s_max[p], p), (s_max[q], q))[1]
            alive.discard(victim)
    surviving = tuple(i for i in ids if i in alive)
    return SamplingReport(delta, scores, float(threshold), surviving)


# ---------------------------------------------------------------------------
# learned metric


def metric_dS(f1: GridFunction, f2: GridFunction, opset: OperatorSet, degree: int = 1) -> float:
    """The learned distance: worst bottleneck over the surviving operators."""
    from .metrics import dmatch_family

    return dmatch_family(f1, f2, opset, degree)


def distance_matrix(
    samples: list[GridFunction], opset: OperatorSet, degree: int = 1
) -> DistanceMatrix:
    """Pairwise d_S over a sample list, with diagrams computed once."""
    cache = DiagramCache(opset, samples, degree)
    ids = opset.ids()
    n = len(samples)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = _exact_max(
                (cache.get(oid, i), cache.get(oid, j)) for oid in ids
            )
    return DistanceMatrix(m)


# ---------------------------------------------------------------------------
# augmentation


def augment(f: GridFunction, seed: int) -> GridFunction:
    """One random plane isometry: small rotation, 1-2 px shift, or a flip.

    Rotations (uniform in [1, 30] degrees) use bilinear resampling with zero
    fill; translations and reflections are grid-exact.
    """
    rng = np.random.default_rng(seed)
    kind = rng.integers(0, 3)
    if kind == 0:
        angle = float(rng.uniform(1.0, 30.0))
        out = ndimage.rotate(
            f.values, angle, reshape=False, order=1, mode="constant", cval=0.0
        )
        return GridFunction(out)
    if kind == 1:
        dx = int(rng.choice([1, 2]) * rng.choice([-1, 1]))
        dy = int(rng.choice([1, 2]) * rng.choice([-1, 1]))
        return apply_isometry(GridIsometry(shift=(dx, dy)), f)
    if rng.integers(0, 2) == 0:
        return apply_isometry(GridIsometry(0, True), f)  # vertical axis
    return apply_isometry(GridIsometry(180, True), f)  # horizontal axis


# ---------------------------------------------------------------------------
# hierarchical clustering


def cluster_average_linkage(m: DistanceMatrix, labels: list[int]) -> Dendrogram:
    """Agglomerative UPGMA clustering; ties broken by smallest (i, j)."""
    n = m.n
    if n < 2:
        raise ValueError("need at least 2 leaves")
    if len(labels) != n:
        raise ValueError("labels length mismatch")
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(m.entries[i, j])
    size = {i: 1 for i in range(n)}
    active = set(range(n))
    merges = []
    next_id = n
    while len(active) > 1:
        best = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        (a, b), h = best
        merges.append((a, b, h))
        active.discard(a)
        active.discard(b)
        for x in active:
            da = dist.pop((min(a, x), max(a, x)))
            db = dist.pop((min(b, x), max(b, x)))
            dist[(x, next_id)] = (size[a] * da + size[b] * db) / (size[a] + size[b])
        dist.pop((a, b))
        size[next_id] = size[a] + size[b]
        active.add(next_id)
        next_id += 1
    return Dendrogram(tuple(merges), tuple(labels))


@dataclass(frozen=True)
class ClusterCut:
    assignments: tuple[int, ...]  # cluster index per leaf
    purity: float


def cut_dendrogram(dend: Dendrogram, k: int) -> ClusterCut:
    """Cut below the k-1 highest merges and score purity against the labels."""
    n = dend.n_leaves
    if not 1 <= k <= n:
        raise ValueError("k must be in [1, n]")
    parent = list(range(n + len(dend.merges)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # heights are non-decreasing, so the k-1 highest merges are the last ones
    for i, (a, b, _) in enumerate(dend.merges[: len(dend.merges) - (k - 1)]):
        node = n + i
        parent[find(a)] = node
        parent[find(b)] = node
    roots = sorted({find(i) for i in range(n)})
    index = {r: c for c, r in enumerate(roots)}
    assign = tuple(index[find(i)] for i in range(n))
    counts: dict[int, dict[int, int]] = {}
    for leaf, c in enumerate(assign):
        counts.setdefault(c, {}).setdefault(dend.leaf_labels[leaf], 0)
        counts[c][dend.leaf_labels[leaf]] += 1
    purity = sum(max(v.values()) for v in counts.values()) / n
    return ClusterCut(assign, purity)
