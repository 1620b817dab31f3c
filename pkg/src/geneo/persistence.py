"""Sublevel-set cubical persistence of grid functions in degrees 0 and 1.

Pixels are vertices (V-construction): edges join 4-adjacent pixels and
squares fill 2x2 blocks, each cell taking the max of its vertices.  Degree 0
uses union-find with the elder rule.  Degree 1 has two routes: boundary
matrix reduction with clearing (the reference implementation) and an
equivalent, much faster union-find on the dual grid used for large inputs.
They are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridFunction, PersistenceDiagram

try:  # pragma: no cover - exercised according to environment
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


# ---------------------------------------------------------------------------
# filtration


@dataclass(frozen=True)
class CubicalFiltration:
    """Filtered cubical complex of a grid: vertex, edge and square values.

    `cells` lists (value, dimension, index) sorted by (value, dimension,
    canonical index); indices are row-major per dimension, with horizontal
    edges preceding vertical ones.
    """

    width: int
    height: int
    vertex_values: np.ndarray  # (h*w,)
    edge_values: np.ndarray  # horizontal then vertical, row-major
    square_values: np.ndarray  # ((h-1)*(w-1),)
    cells: tuple[tuple[float, int, int], ...]


def _edge_endpoints(w: int, h: int) -> np.ndarray:
    """Vertex index pairs per edge, horizontal edges first, row-major."""
    idx = np.arange(w * h).reshape(h, w)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([horiz, vert], axis=0)


def _cell_values(values: np.ndarray):
    v = values
    edge_h = np.maximum(v[:, :-1], v[:, 1:]).ravel()
    edge_v = np.maximum(v[:-1, :], v[1:, :]).ravel()
    edges = np.concatenate([edge_h, edge_v])
    squares = np.maximum(
        np.maximum(v[:-1, :-1], v[:-1, 1:]), np.maximum(v[1:, :-1], v[1:, 1:])
    ).ravel()
    return v.ravel(), edges, squares


def build_filtration(f: GridFunction) -> CubicalFiltration:
    """Build the sublevel filtration, cells sorted deterministically."""
    h, w = f.values.shape
    verts, edges, squares = _cell_values(f.values)
    cells = [(float(v), 0, i) for i, v in enumerate(verts)]
    cells += [(float(v), 1, i) for i, v in enumerate(edges)]
    cells += [(float(v), 2, i) for i, v in enumerate(squares)]
    cells.sort()
    return CubicalFiltration(w, h, verts, edges, squares, tuple(cells))


# ---------------------------------------------------------------------------
# degree 0: union-find with elder rule


def _ranks(vals: np.ndarray) -> np.ndarray:
    """Filtration rank of each node under (value, index) order."""
    order = np.argsort(vals, kind="stable")
    ranks = np.empty(vals.shape[0], dtype=np.int64)
    ranks[order] = np.arange(vals.shape[0])
    return ranks


@njit(cache=True)
def _uf_pairs(node_vals, edges, edge_vals, edge_order, node_order):
    """Elder-rule union-find; returns (killed creator, killer edge, death) triples.

    `node_order[i]` ranks node i in the filtration (smaller = earlier birth).
    Edges are processed in `edge_order`.  The creator of the surviving
    component is always its earliest node.
    """
    n = node_vals.shape[0]
    parent = np.arange(n)
    creator = np.arange(n)
    out_creator = np.empty(edges.shape[0], dtype=np.int64)
    out_death = np.empty(edges.shape[0], dtype=np.float64)
    m = 0
    for t in range(edge_order.shape[0]):
        e = edge_order[t]
        a = edges[e, 0]
        b = edges[e, 1]
        ra = a
        while parent[ra] != ra:
            ra = parent[ra]
        x = a
        while parent[x] != ra:
            nxt = parent[x]
            parent[x] = ra
            x = nxt
        rb = b
        while parent[rb] != rb:
            rb = parent[rb]
        x = b
        while parent[x] != rb:
            nxt = parent[x]
            parent[x] = rb
            x = nxt
        if ra == rb:
            continue
        ca = creator[ra]
        cb = creator[rb]
        if node_order[ca] <= node_order[cb]:
            elder, young = ra, rb
            cy = cb
        else:
            elder, young = rb, ra
            cy = ca
        parent[young] = elder
        out_creator[m] = cy
        out_death[m] = edge_vals[e]
        m += 1
    n_roots = 0
    for i in range(n):
        if parent[i] == i:
            n_roots += 1
    surv = np.empty(n_roots, dtype=np.int64)
    j = 0
    for i in range(n):
        if parent[i] == i:
            surv[j] = creator[i]
            j += 1
    return out_creator[:m], surv, out_death[:m]


def _degree0_pairs(values: np.ndarray):
    """Finite (birth, death) pairs and essential births of the sublevel H0."""
    h, w = values.shape
    node_vals = values.ravel()
    edges = _edge_endpoints(w, h)
    edge_vals = np.maximum(node_vals[edges[:, 0]], node_vals[edges[:, 1]])
    edge_order = np.argsort(edge_vals, kind="stable").astype(np.int64)
    node_order = _ranks(node_vals)
    killed, surv, deaths = _uf_pairs(
        node_vals.astype(np.float64), edges.astype(np.int64), edge_vals.astype(np.float64),
        edge_order, node_order,
    )
    births = node_vals[killed]
    keep = deaths > births
    finite = list(zip(births[keep].tolist(), deaths[keep].tolist()))
    essential = sorted(node_vals[surv].tolist())
    return finite, essential


def persistence_degree0(f: GridFunction) -> PersistenceDiagram:
    """Degree-0 diagram: 4-connected components under the elder rule."""
    finite, essential = _degree0_pairs(f.values)
    return PersistenceDiagram.from_pairs(0, finite, essential)


# ---------------------------------------------------------------------------
# degree 1, fast route: union-find on the dual grid
#
# A 1-cycle born when edge e closes a loop at val(e) dies when the enclosed
# region of squares fills up.  Dually: squares are nodes (entering at their
# value, descending), adjacent squares are linked through their shared edge,
# and boundary squares link to an outer node born at +inf.  Superlevel
# union-find on this dual graph yields exactly the H1 pairs (edge value,
# square value).


def _dual_graph(values: np.ndarray):
    h, w = values.shape
    v = values
    squares = np.maximum(
        np.maximum(v[:-1, :-1], v[:-1, 1:]), np.maximum(v[1:, :-1], v[1:, 1:])
    )
    sh, sw = h - 1, w - 1
    if sh == 0 or sw == 0:
        return None
    idx = np.arange(sh * sw).reshape(sh, sw)
    outer = sh * sw
    node_vals = np.concatenate([squares.ravel(), [np.inf]])

    # interior vertical grid edges separate horizontally adjacent squares
    e_right = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    w_right = np.maximum(v[:-1, 1:-1], v[1:, 1:-1]).ravel()
    # interior horizontal grid edges separate vertically adjacent squares
    e_down = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    w_down = np.maximum(v[1:-1, :-1], v[1:-1, 1:]).ravel()
    # boundary grid edges connect their square to the outer node
    b_nodes = np.concatenate([idx[0, :], idx[-1, :], idx[:, 0], idx[:, -1]])
    b_vals = np.concatenate(
        [
            np.maximum(v[0, :-1], v[0, 1:]),
            np.maximum(v[-1, :-1], v[-1, 1:]),
            np.maximum(v[:-1, 0], v[1:, 0]),
            np.maximum(v[:-1, -1], v[1:, -1]),
        ]
    )
    e_border = np.stack([b_nodes, np.full(b_nodes.shape, outer)], axis=1)

    edges = np.concatenate([e_right, e_down, e_border], axis=0)
    edge_vals = np.concatenate([w_right, w_down, b_vals])
    return node_vals, edges, edge_vals


def _degree1_pairs_dual(values: np.ndarray) -> list[tuple[float, float]]:
    g = _dual_graph(values)
    if g is None:
        return []
    node_vals, edges, edge_vals = g
    # descending filtration: negate values and reuse the elder-rule core
    neg_nodes = -node_vals
    neg_edges = -edge_vals
    edge_order = np.argsort(neg_edges, kind="stable").astype(np.int64)
    node_order = _ranks(neg_nodes)
    killed, _, neg_deaths = _uf_pairs(
        neg_nodes, edges.astype(np.int64), neg_edges.astype(np.float64), edge_order, node_order
    )
    births = -neg_deaths  # grid-edge value where the cycle is born
    deaths = node_vals[killed]  # square value where it fills
    keep = deaths > births
    return list(zip(births[keep].tolist(), deaths[keep].tolist()))


# ---------------------------------------------------------------------------
# degree 1, reference route: boundary matrix reduction with clearing


def _square_boundaries(w: int, h: int) -> np.ndarray:
    """Edge indices of the four sides of each square, row-major squares."""
    sw, sh = w - 1, h - 1
    n_h = (w - 1) * h  # horizontal edge count
    sq_r, sq_c = np.divmod(np.arange(sw * sh), sw)
    top = sq_r * sw + sq_c
    bottom = (sq_r + 1) * sw + sq_c
    left = n_h + sq_r * w + sq_c
    right = n_h + sq_r * w + sq_c + 1
    return np.stack([top, bottom, left, right], axis=1)


def _degree1_pairs_reduction(values: np.ndarray) -> list[tuple[float, float]]:
    """H1 pairs by reducing the square->edge boundary matrix over GF(2).

    Columns are processed in filtration order of squares; clearing is
    implicit since only the degree-2 boundary is reduced.  The pivot of a
    reduced column is the youngest edge of the cycle it kills.
    """
    h, w = values.shape
    if h < 2 or w < 2:
        return []
    _, edge_vals, square_vals = _cell_values(values)
    ne = edge_vals.shape[0]
    # filtration rank of each edge: by (value, index)
    rank_to_edge = np.lexsort((np.arange(ne), edge_vals))
    edge_rank = np.empty(ne, dtype=np.int64)
    edge_rank[rank_to_edge] = np.arange(ne)
    boundaries = _square_boundaries(w, h)
    sq_order = np.lexsort((np.arange(square_vals.shape[0]), square_vals))

    pivot_owner: dict[int, int] = {}
    columns: dict[int, list[int]] = {}
    pairs: list[tuple[float, float]] = []
    for sq in sq_order:
        col = set(int(edge_rank[e]) for e in boundaries[sq])
        while col:
            low = max(col)
            other = pivot_owner.get(low)
            if other is None:
                break
            col ^= set(columns[other])
        if col:
            low = max(col)
            pivot_owner[low] = sq
            columns[sq] = sorted(col)
            birth = float(edge_vals[rank_to_edge[low]])
            death = float(square_vals[sq])
            if death > birth:
                pairs.append((birth, death))
    return pairs


def persistence_degree1(f: GridFunction, method: str = "auto") -> PersistenceDiagram:
    """Degree-1 diagram; no essential classes on a bounded grid.

    method: "dual" (union-find, default for large grids), "reduction"
    (boundary matrix, reference), or "auto".
    """
    values = f.values
    if method == "reduction" or (method == "auto" and values.size <= 256):
        pairs = _degree1_pairs_reduction(values)
    else:
        pairs = _degree1_pairs_dual(values)
    return PersistenceDiagram.from_pairs(1, pairs, ())


def persistence_diagram(f: GridFunction, degree: int) -> PersistenceDiagram:
    if degree == 0:
        return persistence_degree0(f)
    if degree == 1:
        return persistence_degree1(f)
    raise ValueError("only degrees 0 and 1 are supported")
