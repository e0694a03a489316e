"""Domains inside a space graph: boundary decomposition and John geometry.

A domain is a set of interior vertices; its boundary is every non-interior
vertex adjacent to the interior, and d_Omega is the geodesic distance to the
boundary.  A curve from the center z0 to y is c-John when every point z on it
satisfies  length(tail from z to y) <= c * d_Omega(z).

Membership in the largest c-John subdomain is decided exactly (over grid
curves) by a max-margin variant of Dijkstra: propagate

    margin(v) = max over curves z0 -> v of  min_z [ c * d_Omega(z) - tail(z -> v) ]

from z0 outward.  Traversing an edge of length L turns margin m into
min(m - L, c * d_Omega(new vertex)), which strictly decreases along edges, so
the usual greedy argument applies.  Dropping loops from a walk never lowers a
suffix margin, hence walks never beat simple curves and the fixed point is
the exact optimum over curves.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import VisboundError
from .space import SpaceGraph, geodesic_distance

_MEMBER_EPS = 1e-9


@dataclass
class DomainDecomp:
    """Vertex partition into interior, boundary, exterior plus depth field."""

    g: SpaceGraph
    interior: np.ndarray          # bool mask
    boundary: np.ndarray          # bool mask
    d_omega: np.ndarray           # distance to boundary, full length-n array
    n_discarded: int = 0

    @property
    def interior_ids(self) -> np.ndarray:
        return np.flatnonzero(self.interior)

    @property
    def boundary_ids(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    def deepest_vertex(self) -> int:
        depths = np.where(self.interior, self.d_omega, -np.inf)
        return int(np.argmax(depths))

    def require_interior(self, v: int, what: str = "vertex") -> None:
        if not (0 <= v < self.g.n) or not self.interior[v]:
            raise VisboundError("center-outside", f"{what} {v} is not interior")


def decompose(g: SpaceGraph, interior_mask: np.ndarray) -> DomainDecomp:
    """Split the space along an interior predicate.

    Keeps the largest connected component of the interior (count of dropped
    interior vertices recorded).  Raises ``boundaryless-domain`` when no
    vertex of the complement touches the interior.
    """
    interior = np.asarray(interior_mask, dtype=bool).copy()
    if interior.shape != (g.n,):
        raise VisboundError("bad-domain", "interior mask length mismatch")
    if not interior.any():
        raise VisboundError("bad-domain", "interior is empty")

    ids = np.flatnonzero(interior)
    sub = g.adj[ids][:, ids]
    n_comp, labels = connected_components(sub, directed=False)
    n_discarded = 0
    if n_comp > 1:
        counts = np.bincount(labels, minlength=n_comp)
        keep = labels == int(np.argmax(counts))
        n_discarded = int(ids.size - keep.sum())
        interior = np.zeros(g.n, dtype=bool)
        interior[ids[keep]] = True
        ids = ids[keep]

    # Boundary: complement vertices with an interior neighbor.
    touched = (g.adj @ interior.astype(float)) > 0
    boundary = touched & ~interior
    if not boundary.any():
        raise VisboundError("boundaryless-domain", "interior touches no complement vertex")

    d_omega = geodesic_distance(g, np.flatnonzero(boundary))
    return DomainDecomp(g, interior, boundary, d_omega, n_discarded)


@dataclass
class Curve:
    """Vertex path with consecutive adjacency; lengths from edge data."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.int64)
        if self.vertices.size == 0:
            raise VisboundError("bad-curve", "empty curve")

    def edge_lengths(self, g: SpaceGraph) -> np.ndarray:
        vs = self.vertices
        out = np.empty(max(vs.size - 1, 0))
        for i in range(vs.size - 1):
            nbrs, lens = g.neighbors(int(vs[i]))
            hit = np.flatnonzero(nbrs == vs[i + 1])
            if hit.size == 0:
                raise VisboundError(
                    "bad-curve", f"vertices {vs[i]} and {vs[i+1]} are not adjacent"
                )
            out[i] = lens[hit[0]]
        return out

    def length(self, g: SpaceGraph) -> float:
        return float(self.edge_lengths(g).sum())


def concatenate_curves(curves: Sequence[Curve]) -> Curve:
    """Join curves whose endpoints agree (duplicate joints removed)."""
    out = [curves[0].vertices]
    for c in curves[1:]:
        prev_end = out[-1][-1]
        if c.vertices[0] != prev_end:
            raise VisboundError("bad-curve", "curve endpoints do not meet")
        out.append(c.vertices[1:])
    return Curve(np.concatenate(out))


@dataclass
class JohnCurveCheck:
    ok: bool
    worst_ratio: float
    witness: int
    c: float
    slack: float


def verify_john_curve(dd: DomainDecomp, curve: Curve, c: float,
                      slack: float = 0.0) -> JohnCurveCheck:
    """Check tail(z -> target) <= c * d_Omega(z) + slack along the curve.

    The curve may end on the boundary; the boundary endpoint itself is
    exempt (limiting convention).  Any other non-interior vertex raises
    ``curve-escapes-domain``.
    """
    vs = curve.vertices
    inside = dd.interior[vs]
    if not inside[:-1].all() or not (inside[-1] or dd.boundary[vs[-1]]):
        raise VisboundError("curve-escapes-domain", "curve leaves the domain")
    lens = curve.edge_lengths(dd.g)
    tails = np.concatenate([np.cumsum(lens[::-1])[::-1], [0.0]])
    check = inside  # boundary endpoint (if any) skipped
    depth = dd.d_omega[vs[check]]
    tail = tails[check]
    ratios = tail / np.where(depth > 0, depth, np.inf)
    worst = int(np.argmax(ratios)) if ratios.size else 0
    ok = bool(np.all(tail <= c * depth + slack + _MEMBER_EPS * dd.g.h))
    return JohnCurveCheck(
        ok=ok,
        worst_ratio=float(ratios[worst]) if ratios.size else 0.0,
        witness=int(vs[check][worst]) if ratios.size else int(vs[0]),
        c=c,
        slack=slack,
    )


def _john_margins(dd: DomainDecomp, z0: int, c: float, slack: float = 0.0) -> np.ndarray:
    """Max-margin field of the c-John search from z0 (interior vertices)."""
    dd.require_interior(z0, "John center")
    g = dd.g
    cap = c * dd.d_omega + slack
    margins = np.full(g.n, -np.inf)
    done = np.zeros(g.n, dtype=bool)
    interior = dd.interior
    indptr, indices, lengths = g._indptr, g._indices, g._lengths

    margins[z0] = cap[z0]
    heap = [(-margins[z0], z0)]
    while heap:
        neg, v = heapq.heappop(heap)
        if done[v] or -neg < margins[v]:
            continue
        done[v] = True
        m = margins[v]
        lo, hi = indptr[v], indptr[v + 1]
        for u, length in zip(indices[lo:hi], lengths[lo:hi]):
            if done[u] or not interior[u]:
                continue
            cand = m - length
            cu = cap[u]
            if cand > cu:
                cand = cu
            if cand > margins[u]:
                margins[u] = cand
                heapq.heappush(heap, (-cand, int(u)))
    return margins


@dataclass
class JohnLabel:
    """Per-vertex John data for a fixed center.

    ``margins`` is the max-margin field at the requested c; ``quality`` is a
    certified lower bound on the best John quality (1/c' over the tested c'
    grid, +inf at the center, 0 where nothing certified).
    """

    z0: int
    c: float
    margins: np.ndarray
    members: np.ndarray            # bool mask
    quality: np.ndarray
    tested_c: tuple = field(default_factory=tuple)


def john_subdomain(
    dd: DomainDecomp,
    z0: int,
    c: float,
    slack: float = 0.0,
    quality_grid: Optional[Sequence[float]] = None,
) -> tuple[JohnLabel, np.ndarray]:
    """Largest c-John subdomain anchored at z0 (with the given slack).

    Returns the label and the sorted member ids.  Contains B(z0, d_Omega(z0))
    and is monotone in c.  ``quality_grid`` optionally refines the per-vertex
    quality by re-running the search at extra c values (cost: one pass each).
    """
    if c < 1:
        raise VisboundError("bad-john-constant", f"c={c} < 1")
    eps = _MEMBER_EPS * dd.g.h
    margins = _john_margins(dd, z0, c, slack)
    members = margins >= -eps
    quality = np.zeros(dd.g.n)
    quality[members] = 1.0 / c
    tested = [c]
    if quality_grid:
        for cj in sorted(set(float(x) for x in quality_grid), reverse=True):
            if cj < 1 or cj == c:
                continue
            mj = _john_margins(dd, z0, cj, slack) >= -eps
            quality[mj] = np.maximum(quality[mj], 1.0 / cj)
            tested.append(cj)
    quality[z0] = np.inf
    label = JohnLabel(z0, c, margins, members, quality, tuple(sorted(tested)))
    return label, np.flatnonzero(members)


def visible_boundary(
    dd: DomainDecomp,
    z0: int,
    c: float,
    slack: float = 0.0,
    localize: bool = False,
    label: Optional[JohnLabel] = None,
) -> np.ndarray:
    """Boundary vertices reachable from z0 by a c-John curve.

    A boundary vertex w qualifies when some interior neighbor u carries a
    margin covering the final hop: margin(u) - d(u, w) >= 0 (the endpoint
    itself is exempt from the John test).  With ``localize`` the result is
    intersected with B(z0, 3 d_Omega(z0)), the window of the main estimate.
    """
    if label is None or label.z0 != z0 or label.c != c:
        margins = _john_margins(dd, z0, c, slack)
    else:
        margins = label.margins
    eps = _MEMBER_EPS * dd.g.h
    out = []
    for w in dd.boundary_ids:
        nbrs, lens = dd.g.neighbors(int(w))
        inn = dd.interior[nbrs]
        if not inn.any():
            continue
        if np.max(margins[nbrs[inn]] - lens[inn]) >= -eps:
            out.append(int(w))
    vis = np.asarray(sorted(out), dtype=np.int64)
    if localize and vis.size:
        r = dd.d_omega[z0]
        d = geodesic_distance(dd.g, z0, limit=3 * r)
        vis = vis[d[vis] < 3 * r]
    return vis


def cone_domain(
    dd: DomainDecomp,
    curve: Curve,
    certify_c: Optional[float] = None,
    certify_slack: Optional[float] = None,
) -> tuple[np.ndarray, Optional[dict]]:
    """Union of depth balls B(z, d_Omega(z)) along a curve.

    Optionally certifies that the cone, viewed as its own domain with the
    curve start as center, lies inside its certify_c John subdomain (the
    check any John-curve cone must pass, up to the declared slack).
    """
    g = dd.g
    vs = curve.vertices
    if not dd.interior[vs[:-1]].all():
        raise VisboundError("curve-escapes-domain", "cone of a curve leaving the domain")
    centers = np.unique(vs[dd.interior[vs]])
    radii = dd.d_omega[centers]
    keep = radii > 0
    centers, radii = centers[keep], radii[keep]
    if centers.size == 0:
        raise VisboundError("bad-curve", "no interior curve vertex with positive depth")

    # Single search for the union: virtual source at offset rmax - r_i from
    # each center makes dist < rmax equivalent to membership in some ball.
    rmax = float(radii.max())
    n = g.n
    aug = sp.vstack(
        [
            sp.hstack([g.adj, sp.csr_matrix((n, 1))]),
            sp.csr_matrix(
                (np.asarray(rmax - radii), (np.zeros(centers.size, int), centers)),
                shape=(1, n + 1),
            ),
        ]
    ).tocsr()
    dist = dijkstra(aug, directed=True, indices=n, limit=rmax * (1 + 1e-12))
    cone_mask = dist[:n] < rmax
    cone_ids = np.flatnonzero(cone_mask)

    cert = None
    if certify_c is not None:
        slack = dd.g.tol.cone_quality if certify_slack is None else certify_slack
        sub = decompose(g, cone_mask)
        label, members = john_subdomain(sub, int(vs[0]), certify_c, slack=slack)
        inside = np.isin(cone_ids, members, assume_unique=True)
        cert = {
            "c": float(certify_c),
            "slack": float(slack),
            "ok": bool(inside.all()),
            "n_fail": int((~inside).sum()),
            "min_margin": float(label.margins[cone_ids].min()),
        }
    return cone_ids, cert
