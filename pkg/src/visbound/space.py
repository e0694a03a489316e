"""Finite metric measure spaces discretized as weighted grid graphs.

A boolean raster mask becomes an 8-neighbor graph: axis edges of length h,
diagonal edges of length sqrt(2) h, vertex mass weight(x) * h^2.  Geodesic
distance is graph shortest-path distance; balls are open (d < r).  The grid
metric overestimates Euclidean length by at most ~8% (octile distortion),
which is the only geometry-fidelity knob of the package.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import VisboundError
from .tolerances import CLOSED_BALL_RTOL, PATH_TIE_RTOL, Tolerances

_OFFSETS = [(0, 1), (1, 0), (1, 1), (1, -1)]


@dataclass(frozen=True)
class Ball:
    """Open metric ball: members are vertices with d(center, y) < radius."""

    center: int
    radius: float

    def dilate(self, factor: float) -> "Ball":
        return replace(self, radius=self.radius * factor)


@dataclass(frozen=True)
class PoincareParams:
    """Exponent record for Poincare-type hypotheses.

    Ordering constraints differ by use site (visibility stage wants
    t < q < p, trace stage wants p < q_hat < q) and are validated there.
    """

    p: float
    q: float
    q_hat: float = 2.0
    kappa: float = 1.0


def validate_visibility_exponents(t: float, q: float, p: float) -> None:
    if not (0 <= t < q < p):
        raise VisboundError(
            "bad-exponents", f"need 0 <= t < q < p, got t={t}, q={q}, p={p}"
        )


def validate_trace_exponents(p: float, q_hat: float, q: float,
                             t: float = 1.0) -> None:
    if not (max(1.0, t) < p < q_hat < q):
        raise VisboundError(
            "bad-exponents",
            f"need max(1,t) < p < q_hat < q, got t={t}, p={p}, q_hat={q_hat}, q={q}",
        )


class SpaceGraph:
    """Immutable weighted grid graph with coordinates, masses and edge lengths.

    Attributes
    ----------
    h : float
        Cell size.
    cells : (n, 2) int array
        (row, col) of each vertex in the originating mask.
    coords : (n, 2) float array
        Planar coordinates in length units (col*h, row*h).
    mass : (n,) float array
        Vertex measure weight(x) * h^2.
    adj : scipy.sparse.csr_matrix
        Symmetric adjacency with edge lengths as data.
    """

    def __init__(self, h, cells, coords, mass, adj, n_discarded=0):
        self.h = float(h)
        self.cells = cells
        self.coords = coords
        self.mass = mass
        self.adj = adj
        self.n_discarded = int(n_discarded)
        self.tol = Tolerances(self.h)
        self._indptr = adj.indptr
        self._indices = adj.indices
        self._lengths = adj.data

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def neighbors(self, v: int):
        """(neighbor ids, edge lengths) of vertex v."""
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return self._indices[lo:hi], self._lengths[lo:hi]

    def vertex_at(self, row: int, col: int) -> int:
        """Vertex id of a mask cell; -1 if the cell is not in the space."""
        hit = np.flatnonzero((self.cells[:, 0] == row) & (self.cells[:, 1] == col))
        return int(hit[0]) if hit.size else -1

    def metric_distortion(self, n_samples: int = 64, seed: int = 0) -> float:
        """Max sampled ratio of graph distance to straight-line distance."""
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.n, size=min(n_samples, self.n), replace=False)
        worst = 1.0
        for s in idx[: max(4, n_samples // 8)]:
            d = geodesic_distance(self, int(s))
            finite = np.isfinite(d) & (d > 0)
            eucl = np.hypot(*(self.coords[finite] - self.coords[s]).T)
            good = eucl > 0
            if good.any():
                worst = max(worst, float(np.max(d[finite][good] / eucl[good])))
        return worst


def build_grid_space(
    mask: np.ndarray,
    h: float = 1.0,
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> SpaceGraph:
    """Build the 8-neighbor space over the true cells of ``mask``.

    Keeps only the largest connected component (discard count recorded on the
    result).  Raises ``empty-space`` for an all-false mask and
    ``degenerate-space`` when the surviving component is a single vertex.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise VisboundError("bad-mask", "mask must be 2-D")
    if h <= 0:
        raise VisboundError("bad-cell-size", f"h={h}")
    if not mask.any():
        raise VisboundError("empty-space", "mask has no true cells")

    idx = -np.ones(mask.shape, dtype=np.int64)
    rr, cc = np.nonzero(mask)
    n_all = rr.size
    idx[rr, cc] = np.arange(n_all)

    rows_i, cols_j, data = [], [], []
    nrow, ncol = mask.shape
    for di, dj in _OFFSETS:
        a_r = slice(max(0, -di), min(nrow, nrow - di))
        a_c = slice(max(0, -dj), min(ncol, ncol - dj))
        b_r = slice(max(0, di), min(nrow, nrow + di))
        b_c = slice(max(0, dj), min(ncol, ncol + dj))
        both = mask[a_r, a_c] & mask[b_r, b_c]
        src = idx[a_r, a_c][both]
        dst = idx[b_r, b_c][both]
        length = h * float(np.hypot(di, dj))
        rows_i.append(src)
        cols_j.append(dst)
        data.append(np.full(src.size, length))

    src = np.concatenate(rows_i)
    dst = np.concatenate(cols_j)
    lng = np.concatenate(data)
    adj = sp.csr_matrix(
        (np.concatenate([lng, lng]), (np.concatenate([src, dst]), np.concatenate([dst, src]))),
        shape=(n_all, n_all),
    )

    n_comp, labels = connected_components(adj, directed=False)
    if n_comp > 1:
        counts = np.bincount(labels, minlength=n_comp)
        keep_label = int(np.argmax(counts))
        keep = labels == keep_label
    else:
        keep = np.ones(n_all, dtype=bool)
    n_discarded = int(n_all - keep.sum())

    if keep.sum() < 2:
        raise VisboundError(
            "degenerate-space",
            f"largest component has {int(keep.sum())} vertex; no edges",
        )

    if n_discarded:
        remap = -np.ones(n_all, dtype=np.int64)
        remap[keep] = np.arange(int(keep.sum()))
        adj = adj[keep][:, keep].tocsr()
        rr, cc = rr[keep], cc[keep]

    cells = np.stack([rr, cc], axis=1)
    coords = np.stack([cc * h, rr * h], axis=1).astype(float)
    if weight is None:
        w = np.ones(cells.shape[0])
    else:
        w = np.asarray(weight(coords), dtype=float)
        if w.shape != (cells.shape[0],) or (w <= 0).any() or not np.isfinite(w).all():
            raise VisboundError("bad-weight", "weight must be positive and finite")
    mass = w * h * h
    return SpaceGraph(h, cells, coords, mass, adj.tocsr(), n_discarded)


def geodesic_distance(
    g: SpaceGraph,
    sources,
    limit: float = np.inf,
) -> np.ndarray:
    """Geodesic distance field from a vertex or a set of vertices.

    Multi-source fields take the pointwise minimum.  Vertices farther than
    ``limit`` (when finite) come back as +inf; unreachable vertices are +inf.
    """
    indices = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if indices.size == 0:
        return np.full(g.n, np.inf)
    lim = np.inf if not np.isfinite(limit) else float(limit) * (1 + 1e-12)
    if indices.size == 1:
        return dijkstra(g.adj, directed=True, indices=indices[0], limit=lim)
    return dijkstra(g.adj, directed=True, indices=indices, limit=lim, min_only=True)


def ball_members(g: SpaceGraph, ball: Ball, dist: Optional[np.ndarray] = None) -> np.ndarray:
    """Vertex ids of the open ball, ascending."""
    if not (0 <= ball.center < g.n):
        raise VisboundError("center-outside", f"vertex {ball.center}")
    if ball.radius <= 0:
        return np.empty(0, dtype=np.int64)
    d = geodesic_distance(g, ball.center, limit=ball.radius) if dist is None else dist
    return np.flatnonzero(d < ball.radius)


def closed_ball_members(g: SpaceGraph, ball: Ball, dist: Optional[np.ndarray] = None) -> np.ndarray:
    """Closure in the metric sense: d <= r, floating-point safe."""
    cap = ball.radius * (1 + CLOSED_BALL_RTOL)
    d = geodesic_distance(g, ball.center, limit=cap) if dist is None else dist
    return np.flatnonzero(d <= cap)


def ball_mass(g: SpaceGraph, ball: Ball, dist: Optional[np.ndarray] = None) -> float:
    members = ball_members(g, ball, dist=dist)
    return float(g.mass[members].sum())


def shortest_path(g: SpaceGraph, src: int, dst: int,
                  dist_to_dst: Optional[np.ndarray] = None) -> np.ndarray:
    """One geodesic from src to dst, ties broken by smallest vertex id.

    Greedy descent on the distance-to-destination field keeps the result
    independent of solver-internal predecessor ordering.
    """
    d = geodesic_distance(g, dst) if dist_to_dst is None else dist_to_dst
    if not np.isfinite(d[src]):
        raise VisboundError("unreachable", f"{src} -> {dst}")
    path = [src]
    v = src
    guard = 4 * g.n
    while v != dst:
        nbrs, lens = g.neighbors(v)
        slack = PATH_TIE_RTOL * (1.0 + d[v])
        on_geo = np.flatnonzero(np.abs(d[nbrs] + lens - d[v]) <= slack)
        if on_geo.size == 0:
            raise VisboundError("unreachable", f"broken field at {v}")
        v = int(nbrs[on_geo].min())
        path.append(v)
        guard -= 1
        if guard < 0:
            raise VisboundError("unreachable", "path reconstruction did not terminate")
    return np.asarray(path, dtype=np.int64)


def doubling_constant(
    g: SpaceGraph,
    radii: Optional[Sequence[float]] = None,
    n_centers: int = 32,
    seed: int = 0,
) -> float:
    """Sampled doubling constant sup mu(B(x,2r)) / mu(B(x,r)).

    A sampled lower bound on the true constant; deterministic for a fixed
    seed.  Radii default to a geometric grid from 2h to a quarter of the
    sampled diameter.
    """
    rng = np.random.default_rng(seed)
    centers = rng.choice(g.n, size=min(n_centers, g.n), replace=False)
    if radii is None:
        d0 = geodesic_distance(g, int(centers[0]))
        diam = float(d0[np.isfinite(d0)].max())
        r = 2 * g.h
        radii = []
        while r <= max(diam / 4, 2 * g.h):
            radii.append(r)
            r *= 2
    best = 1.0
    for x in centers:
        d = geodesic_distance(g, int(x), limit=2 * max(radii))
        for r in radii:
            small = float(g.mass[d < r].sum())
            big = float(g.mass[d < 2 * r].sum())
            if small > 0:
                best = max(best, big / small)
    return best
