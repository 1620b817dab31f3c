"""The pseudo-metric lattice on functions, group elements and operators.

All suprema over function sets are maxima over the finite sample list given
by the caller; images compared under isometries are zero-padded to a common
square first, which is the single place the boundary convention lives.
"""

from __future__ import annotations

import numpy as np

from .core import GridFunction, GridIsometry, OperatorSet, apply_isometry, is_group
from .diagram_metric import bottleneck
from .operators import KernelOperator
from .persistence import persistence_diagram


def pad_to_common_square(fs: list[GridFunction], margin: int = 0) -> list[GridFunction]:
    """Zero-pad each grid, centered, to a shared square domain."""
    side = max(max(f.width, f.height) for f in fs) + 2 * margin
    out = []
    for f in fs:
        h, w = f.values.shape
        top = (side - h) // 2
        left = (side - w) // 2
        v = np.zeros((side, side))
        v[top : top + h, left : left + w] = f.values
        out.append(GridFunction(v))
    return out


def _as_operators(fset):
    if isinstance(fset, OperatorSet):
        return [KernelOperator(k) for k in fset.kernels()]
    return list(fset)


def dist_phi(f1: GridFunction, f2: GridFunction) -> float:
    """Sup-norm distance between two grid functions."""
    if f1.values.shape != f2.values.shape:
        raise ValueError("dimension mismatch")
    return float(np.abs(f1.values - f2.values).max())


def dist_x(x1: tuple[int, int], x2: tuple[int, int], phi: list[GridFunction]) -> float:
    """How well the measurement set separates two pixels (row, col)."""
    if not phi:
        raise ValueError("empty function set")
    return max(abs(float(f.values[x1]) - float(f.values[x2])) for f in phi)


def dist_g(g1: GridIsometry, g2: GridIsometry, phi: list[GridFunction]) -> float:
    """Pseudo-distance between group elements as seen through the data."""
    if not phi:
        raise ValueError("empty function set")
    margin = max(
        max(abs(g.shift[0]), abs(g.shift[1])) for g in (g1, g2)
    )
    best = 0.0
    for f in pad_to_common_square(phi, margin):
        best = max(best, dist_phi(apply_isometry(g1, f), apply_isometry(g2, f)))
    return best


def natural_pseudo_distance(
    f1: GridFunction, f2: GridFunction, group: list[GridIsometry]
) -> float:
    """min over g in G of the sup-norm distance between f1 and f2∘g."""
    if not is_group(group):
        raise ValueError("element list is not a finite group")
    margin = max(max(abs(g.shift[0]), abs(g.shift[1])) for g in group)
    p1, p2 = pad_to_common_square([f1, f2], margin)
    return min(dist_phi(p1, apply_isometry(g, p2)) for g in group)


def dist_geneo(op1, op2, phi: list[GridFunction]) -> float:
    """Sup over the sample set of the sup-norm distance between outputs."""
    if not phi:
        raise ValueError("empty function set")
    return max(dist_phi(op1(f), op2(f)) for f in phi)


def dist_geneo_h(op1, op2, phi: list[GridFunction], group: list[GridIsometry]) -> float:
    """Like dist_geneo but with outputs compared up to the group action."""
    if not phi:
        raise ValueError("empty function set")
    return max(natural_pseudo_distance(op1(f), op2(f), group) for f in phi)


def dmatch_family(f1: GridFunction, f2: GridFunction, fset, degree: int) -> float:
    """Strongly invariant pseudo-metric: worst bottleneck over the family."""
    ops = _as_operators(fset)
    if not ops:
        raise ValueError("empty operator set")
    best = 0.0
    for op in ops:
        d1 = persistence_diagram(op(f1), degree)
        d2 = persistence_diagram(op(f2), degree)
        best = max(best, bottleneck(d1, d2))
    return best


def delta_geneo(op1, op2, phi: list[GridFunction], degree: int) -> float:
    """Diagram-level proxy distance between two operators."""
    if not phi:
        raise ValueError("empty function set")
    best = 0.0
    for f in phi:
        d1 = persistence_diagram(op1(f), degree)
        d2 = persistence_diagram(op2(f), degree)
        best = max(best, bottleneck(d1, d2))
    return best


def hausdorff_operator_sets(
    set_a, set_b, phi: list[GridFunction], group: list[GridIsometry]
) -> float:
    """Hausdorff distance between operator sets under dist_geneo_h."""
    ops_a = _as_operators(set_a)
    ops_b = _as_operators(set_b)
    if not ops_a or not ops_b:
        raise ValueError("empty operator set")
    d = np.array([[dist_geneo_h(a, b, phi, group) for b in ops_b] for a in ops_a])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
