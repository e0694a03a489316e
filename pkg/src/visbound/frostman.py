"""Boundary generation trees and their Frostman-type measures.

Starting from a deep center z0 with depth r and its nearest boundary vertex
w0, each generation refines the boundary picture by one scale factor eta:
around every level-k point w a maximal family of well-placed balls of radius
eta^(k+1) r is selected inside the window B(w, 2 eta^k r), each ball tangent
to the boundary (designated contact vertex) and chainable back to the
parent's seed ball through balls of the same radius.  The contacts form the
next generation; weights split parent mass proportionally to the ambient
mass of the contact-centered balls, producing a unit-mass atomic measure at
every depth whose dyadic scaling behavior is the object under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import VisboundError
from .geometry import Curve, DomainDecomp, concatenate_curves, verify_john_curve
from .space import Ball, SpaceGraph, geodesic_distance, shortest_path
from .tolerances import CLOSED_BALL_RTOL, MASS_ATOL

_EPS = 1e-9


class _Patch:
    """Subgraph around a window; local searches at exact global distances.

    Vertices within ``reach`` of the center are extracted; any geodesic of
    length <= reach - (distance of its start to the center) stays inside, so
    distances measured here agree with the full space for the lengths used.
    """

    def __init__(self, g: SpaceGraph, center: int, reach: float):
        self.g = g
        self.dist_center = geodesic_distance(g, center, limit=reach)
        self.ids = np.flatnonzero(self.dist_center <= reach * (1 + 1e-12))
        self.local = -np.ones(g.n, dtype=np.int64)
        self.local[self.ids] = np.arange(self.ids.size)
        self.adj = g.adj[self.ids][:, self.ids].tocsr()

    def distances(self, sources, limit, with_sources=False):
        src = self.local[np.atleast_1d(np.asarray(sources, dtype=np.int64))]
        if (src < 0).any():
            raise VisboundError("center-outside", "source outside patch")
        lim = limit * (1 + 1e-12)
        if with_sources:
            d, _, srcs = dijkstra(
                self.adj, directed=True, indices=src, limit=lim,
                min_only=True, return_predecessors=True,
            )
            glob_src = np.where(srcs >= 0, self.ids[np.clip(srcs, 0, None)], -1)
            return d, glob_src
        if src.size == 1:
            return dijkstra(self.adj, directed=True, indices=src[0], limit=lim)
        return dijkstra(self.adj, directed=True, indices=src, limit=lim, min_only=True)


@dataclass
class BallFamily:
    """Well-placed balls of one radius in one boundary window.

    Balls lie inside the domain, their 4-dilates are pairwise disjoint (exact
    vertex-set test), each has a designated boundary contact within h of its
    sphere and inside the window, and contacts are pairwise 8*radius - 2h
    separated (enforced, so generation separation holds by construction).
    """

    window_center: int
    window_radius: float
    radius: float
    centers: np.ndarray
    contacts: np.ndarray
    ball_masses: np.ndarray           # mu(B(center, radius))
    contact_ball_masses: np.ndarray   # mu(B(contact, radius))
    maximality_certified: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def balls(self) -> list[Ball]:
        return [Ball(int(c), self.radius) for c in self.centers]

    def __len__(self) -> int:
        return int(self.centers.size)


def well_placed_family(
    dd: DomainDecomp,
    w: int,
    rho: float,
    eta: float,
    seed_center: int,
) -> BallFamily:
    """Greedy maximal well-placed family in the window B(w, 2 rho).

    Candidates are interior vertices with depth in [eta rho, eta rho + h]
    carrying a boundary contact in the window, restricted to those whose
    ball chains back to the seed ball B(seed_center, eta rho) through
    same-radius balls centered in the window.  Greedy order: descending ball
    mass, then vertex id.  Maximality is re-certified by a final full scan.
    """
    g = dd.g
    h = g.h
    radius = eta * rho
    if radius < 2 * h:
        raise VisboundError("eta-unresolvable", f"ball radius {radius} below 2h")
    if not dd.boundary[w]:
        raise VisboundError("center-outside", f"window center {w} is not a boundary vertex")
    dd.require_interior(seed_center, "seed center")
    if dd.d_omega[seed_center] < radius - _EPS * h:
        raise VisboundError("bad-seed", "seed ball leaves the domain")

    patch = _Patch(g, w, 2 * rho + 8 * radius)
    window = patch.dist_center < 2 * rho
    if not patch.dist_center[seed_center] < 2 * rho:
        raise VisboundError("bad-seed", "seed center outside the window")

    chain_nodes = window & dd.interior & (dd.d_omega >= radius - _EPS * h)
    window_boundary = window & dd.boundary

    # Chain reachability: closure of the seed under hops of length <= radius.
    reached = np.zeros(g.n, dtype=bool)
    chain_round = np.full(g.n, -1, dtype=np.int64)
    chain_src = np.full(g.n, -1, dtype=np.int64)
    reached[seed_center] = True
    chain_round[seed_center] = 0
    frontier = np.asarray([seed_center])
    rounds = 0
    while frontier.size:
        d, srcs = patch.distances(frontier, radius, with_sources=True)
        hit = np.zeros(g.n, dtype=bool)
        hit[patch.ids] = d <= radius * (1 + CLOSED_BALL_RTOL)
        new = chain_nodes & hit & ~reached
        ids_new = np.flatnonzero(new)
        if ids_new.size == 0:
            break
        rounds += 1
        reached[ids_new] = True
        chain_round[ids_new] = rounds
        chain_src[ids_new] = srcs[patch.local[ids_new]]
        frontier = ids_new

    band = chain_nodes & reached & (dd.d_omega <= radius + h + _EPS * h)
    cand_ids = np.flatnonzero(band)

    # Contact search and ball mass, one bounded search per candidate.
    cands = []
    for x in cand_ids:
        d = patch.distances(int(x), radius + h)
        on_patch = np.flatnonzero(np.isfinite(d))
        glob = patch.ids[on_patch]
        dg = d[on_patch]
        bmask = dg < radius
        mass = float(g.mass[glob[bmask]].sum())
        contacts = glob[(dg <= radius + h + _EPS * h) & window_boundary[glob]]
        if contacts.size == 0:
            continue
        dc = dg[(dg <= radius + h + _EPS * h) & window_boundary[glob]]
        order = np.lexsort((contacts, np.abs(dc - radius)))
        cands.append((int(x), int(contacts[order[0]]), mass))
    cands.sort(key=lambda c: (-c[2], c[0]))

    accepted: list[dict] = []

    def conflicts(x: int, contact: int, fourball_cache: dict) -> bool:
        cx = g.coords[x]
        bx = g.coords[contact]
        for acc in accepted:
            # Contact separation 8*radius - 2h, Euclidean lower bound first.
            gap = 8 * radius - 2 * h
            if np.hypot(*(g.coords[acc["contact"]] - bx)) < gap:
                dc = acc["contact_field"][contact]
                if np.isfinite(dc) and dc < gap - _EPS * h:
                    return True
            # Exact 4-ball vertex-set disjointness.
            if np.hypot(*(g.coords[acc["center"]] - cx)) < 8 * radius:
                if x not in fourball_cache:
                    d4 = patch.distances(x, 4 * radius)
                    m = np.zeros(g.n, dtype=bool)
                    m[patch.ids] = d4 < 4 * radius
                    fourball_cache[x] = m
                if (acc["fourball"] & fourball_cache[x]).any():
                    return True
        return False

    fourball_cache: dict[int, np.ndarray] = {}
    for x, contact, mass in cands:
        if conflicts(x, contact, fourball_cache):
            continue
        d4 = patch.distances(x, 4 * radius)
        fourball = np.zeros(g.n, dtype=bool)
        fourball[patch.ids] = d4 < 4 * radius
        cf_local = patch.distances(contact, 8 * radius)
        contact_field = np.full(g.n, np.inf)
        contact_field[patch.ids] = cf_local
        contact_mass = float(g.mass[patch.ids[cf_local < radius]].sum())
        accepted.append(
            {
                "center": x,
                "contact": contact,
                "mass": mass,
                "contact_mass": contact_mass,
                "fourball": fourball,
                "contact_field": contact_field,
            }
        )

    certified = all(
        conflicts(x, contact, fourball_cache)
        for x, contact, mass in cands
        if x not in {a["center"] for a in accepted}
    )

    fam = BallFamily(
        window_center=w,
        window_radius=2 * rho,
        radius=radius,
        centers=np.asarray([a["center"] for a in accepted], dtype=np.int64),
        contacts=np.asarray([a["contact"] for a in accepted], dtype=np.int64),
        ball_masses=np.asarray([a["mass"] for a in accepted]),
        contact_ball_masses=np.asarray([a["contact_mass"] for a in accepted]),
        maximality_certified=certified,
        diagnostics={
            "n_candidates": len(cands),
            "chain_rounds": rounds,
            "chain_round": {int(a["center"]): int(chain_round[a["center"]]) for a in accepted},
        },
    )
    fam.diagnostics["chain_src"] = chain_src
    return fam


@dataclass
class ChainedFamily:
    """A well-placed family plus a pruned chain skeleton back to the seed."""

    family: BallFamily
    seed_center: int
    radius: float
    all_centers: np.ndarray
    chain_paths: dict[int, tuple[int, ...]]   # family center -> centers to seed
    hops: dict[int, int]                      # family center -> N (balls incl. ends)
    edges: list[tuple[int, int]]
    minimal: bool = True


def chainable_closure(dd: DomainDecomp, family: BallFamily, seed_center: int) -> ChainedFamily:
    """Extract shortest ball chains and prune to a locally minimal skeleton.

    Chain adjacency: center of one ball lies in the closure of the other
    (d <= radius).  The returned skeleton keeps every family center and the
    seed; removing any other center disconnects some family ball from the
    seed (re-verified).
    """
    g = dd.g
    radius = family.radius
    chain_src = family.diagnostics.get("chain_src")
    if chain_src is None:
        raise VisboundError("chain-broken", "family carries no chain data")

    needed: set[int] = set()
    paths: dict[int, tuple[int, ...]] = {}
    for c in family.centers:
        path = [int(c)]
        v = int(c)
        guard = g.n
        while v != seed_center:
            v = int(chain_src[v])
            if v < 0 or guard == 0:
                raise VisboundError("chain-broken", f"no chain from {int(c)} to seed")
            path.append(v)
            guard -= 1
        paths[int(c)] = tuple(path)
        needed.update(path)

    mandatory = set(int(c) for c in family.centers) | {seed_center}
    centers = sorted(needed)

    # Chain-graph adjacency, computed once; subsets inherit it.
    full_adj: dict[int, set[int]] = {v: set() for v in centers}
    for v in centers:
        d = geodesic_distance(g, v, limit=radius)
        for u in centers:
            if u != v and d[u] <= radius * (1 + CLOSED_BALL_RTOL):
                full_adj[v].add(u)
                full_adj[u].add(v)

    def connected(nodes: Sequence[int]) -> bool:
        keep = set(nodes)
        if seed_center not in keep:
            return False
        seen = {seed_center}
        stack = [seed_center]
        while stack:
            v = stack.pop()
            for u in full_adj[v]:
                if u in keep and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return all(int(c) in seen for c in family.centers)

    # Greedy prune, largest id first for a deterministic outcome.
    removable = sorted((v for v in centers if v not in mandatory), reverse=True)
    kept = list(centers)
    for v in removable:
        trial = [u for u in kept if u != v]
        if connected(trial):
            kept = trial

    adj = {v: full_adj[v] & set(kept) for v in kept}
    minimal = all(
        not connected([u for u in kept if u != v])
        for v in kept
        if v not in mandatory
    )

    # Re-route paths through the pruned skeleton (BFS hop counts).
    hop = {seed_center: 0}
    prev: dict[int, int] = {}
    queue = [seed_center]
    while queue:
        v = queue.pop(0)
        for u in sorted(adj[v]):
            if u not in hop:
                hop[u] = hop[v] + 1
                prev[u] = v
                queue.append(u)
    final_paths: dict[int, tuple[int, ...]] = {}
    hops: dict[int, int] = {}
    for c in family.centers:
        c = int(c)
        if c not in hop:
            raise VisboundError("chain-broken", f"pruning disconnected {c}")
        path = [c]
        while path[-1] != seed_center:
            path.append(prev[path[-1]])
        final_paths[c] = tuple(path)
        hops[c] = hop[c] + 1  # balls in the chain, both ends included

    edges = sorted({(min(a, b), max(a, b)) for a in kept for b in adj[a]})
    return ChainedFamily(
        family=family,
        seed_center=seed_center,
        radius=radius,
        all_centers=np.asarray(kept, dtype=np.int64),
        chain_paths=final_paths,
        hops=hops,
        edges=edges,
        minimal=minimal,
    )


@dataclass
class GenPoint:
    vertex: int            # boundary contact
    ball_center: int
    parent: int            # index into the previous level, -1 at the root
    ball_mass_at_vertex: float
    chain_hops: int


@dataclass
class Generation:
    k: int
    radius: float
    points: list[GenPoint]
    families: dict[int, BallFamily] = field(default_factory=dict)
    chains: dict[int, ChainedFamily] = field(default_factory=dict)


@dataclass
class GenerationTree:
    z0: int
    r: float
    eta: float
    depth_requested: int
    levels: list[Generation]
    flags: list[str] = field(default_factory=list)
    dd: Optional[DomainDecomp] = None

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> GenPoint:
        return self.levels[0].points[0]

    def points_at(self, k: int) -> list[GenPoint]:
        return self.levels[k].points

    def vertices_at(self, k: int) -> np.ndarray:
        return np.asarray([p.vertex for p in self.levels[k].points], dtype=np.int64)

    def children(self, k: int, idx: int) -> list[int]:
        if k + 1 > self.depth:
            return []
        return [i for i, p in enumerate(self.levels[k + 1].points) if p.parent == idx]

    @staticmethod
    def from_level_lists(levels_spec, eta: float, r: float, z0: int = 0) -> "GenerationTree":
        """Hand-built tree: levels_spec[k] is a list of (vertex, parent, ball_mass).

        Level 0 must hold the single root.  Geometry-free: enough for the
        weight recursion and its oracles.
        """
        levels = []
        for k, rows in enumerate(levels_spec):
            pts = [
                GenPoint(vertex=int(v), ball_center=int(v), parent=int(par),
                         ball_mass_at_vertex=float(m), chain_hops=1)
                for (v, par, m) in rows
            ]
            levels.append(Generation(k=k, radius=eta ** k * r, points=pts))
        if len(levels[0].points) != 1:
            raise VisboundError("bad-tree", "level 0 must hold exactly the root")
        return GenerationTree(z0=z0, r=r, eta=eta, depth_requested=len(levels) - 1,
                              levels=levels)


def build_generations(
    dd: DomainDecomp,
    z0: int,
    eta: float,
    depth: int,
    min_radius_cells: float = 2.0,
) -> GenerationTree:
    """Build the generation tree of the requested depth at center z0.

    Truncates (with a flag) when the next ball radius eta^k r would drop
    below ``min_radius_cells`` * h or when no window produces any ball.
    """
    g = dd.g
    dd.require_interior(z0, "tree center")
    if not (0 < eta < 0.5):
        raise VisboundError("bad-eta", f"eta={eta}")
    r = float(dd.d_omega[z0])

    d_z0 = geodesic_distance(g, z0, limit=r + 2 * g.h)
    bnd = dd.boundary_ids
    db = d_z0[bnd]
    w0 = int(bnd[np.lexsort((bnd, db))[0]])

    d_w0 = geodesic_distance(g, w0, limit=r)
    root_mass = float(g.mass[d_w0 < r].sum())
    root = GenPoint(vertex=w0, ball_center=z0, parent=-1,
                    ball_mass_at_vertex=root_mass, chain_hops=0)
    tree = GenerationTree(z0=z0, r=r, eta=eta, depth_requested=depth,
                          levels=[Generation(k=0, radius=r, points=[root])], dd=dd)

    for k in range(1, depth + 1):
        radius = eta ** k * r
        if radius < min_radius_cells * g.h:
            tree.flags.append(f"resolution-truncated:k={k}")
            break
        gen = Generation(k=k, radius=radius, points=[])
        parents = tree.levels[k - 1].points
        for pi, parent in enumerate(parents):
            rho = eta ** (k - 1) * r
            try:
                fam = well_placed_family(dd, parent.vertex, rho, eta, parent.ball_center)
            except VisboundError as err:
                if err.code in ("eta-unresolvable",):
                    fam = None
                else:
                    raise
            if fam is None or len(fam) == 0:
                tree.flags.append(f"starved-window:k={k},vertex={parent.vertex}")
                continue
            chained = chainable_closure(dd, fam, parent.ball_center)
            gen.families[pi] = fam
            gen.chains[pi] = chained
            for center, contact, mass_c in zip(fam.centers, fam.contacts, fam.contact_ball_masses):
                gen.points.append(
                    GenPoint(vertex=int(contact), ball_center=int(center), parent=pi,
                             ball_mass_at_vertex=float(mass_c),
                             chain_hops=chained.hops[int(center)])
                )
        if not gen.points:
            tree.flags.append(f"starved-generation:k={k}")
            break
        tree.levels.append(gen)
    return tree


def chain_bound(tree: GenerationTree, doubling: Optional[float] = None) -> dict:
    """Chain-length bound M and the packing-bound comparison.

    M = max chain ball count over the tree.  The packing bound counts
    (eta rho)-separated centers in a 2 rho window via the doubling constant:
    chains with minimal hop count have non-adjacent balls disjoint, so each
    parity class is (radius)-separated.
    """
    hops = [p.chain_hops for lvl in tree.levels[1:] for p in lvl.points]
    m_val = max(hops) if hops else 0
    out = {"M": m_val, "max_hops_per_level": {
        lvl.k: max((p.chain_hops for p in lvl.points), default=0)
        for lvl in tree.levels[1:]
    }}
    if doubling is not None:
        ratio = 4 * (2 / tree.eta) + 2
        exponent = math.ceil(math.log2(ratio))
        packing = doubling ** exponent
        out["doubling"] = doubling
        out["packing_bound"] = packing
        out["bound"] = 2 * packing
        out["ok"] = bool(m_val <= 2 * packing)
    return out


@dataclass
class FrostmanMeasure:
    """Level weights of a generation tree; each level sums to unit mass."""

    tree: GenerationTree
    weights: list[np.ndarray]

    def level(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return self.tree.vertices_at(k), self.weights[k]

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return self.level(self.tree.depth)

    def mass_in_ball(self, g: SpaceGraph, k: int, center: int, radius: float) -> float:
        verts, w = self.level(k)
        d = geodesic_distance(g, center, limit=radius)
        return float(w[d[verts] < radius].sum())


def frostman_weights(tree: GenerationTree) -> FrostmanMeasure:
    """Mass-splitting recursion down the tree.

    a(root) = 1;  a(child) = a(parent) * m(child) / sum of m over siblings,
    where m is the ambient mass of the ball at the child's boundary vertex.
    Raises ``orphaned-mass`` when a weighted point has no children before
    the last level.
    """
    weights = [np.asarray([1.0])]
    for k in range(tree.depth):
        parents = tree.levels[k].points
        childs = tree.levels[k + 1].points
        a_parent = weights[k]
        by_parent: dict[int, list[int]] = {}
        for ci, p in enumerate(childs):
            by_parent.setdefault(p.parent, []).append(ci)
        a = np.zeros(len(childs))
        for pi in range(len(parents)):
            kids = by_parent.get(pi, [])
            if not kids:
                if a_parent[pi] > 0:
                    raise VisboundError(
                        "orphaned-mass",
                        f"level {k} point {parents[pi].vertex} has mass but no children",
                    )
                continue
            denom = sum(childs[ci].ball_mass_at_vertex for ci in kids)
            if denom <= 0:
                raise VisboundError("orphaned-mass", "children carry no ball mass")
            for ci in kids:
                a[ci] = a_parent[pi] * childs[ci].ball_mass_at_vertex / denom
        weights.append(a)
    return FrostmanMeasure(tree=tree, weights=weights)


def verify_telescoping(measure: FrostmanMeasure, g: SpaceGraph,
                       atol: float = MASS_ATOL) -> dict:
    """Check level-consistency of the measures.

    For every k1 < k2 <= depth and w in level k1:
    mass of level k2 in B(w, 3 eta^k1 r) equals mass of level k1 in
    B(w, eta^k1 r) equals a(w, k1).
    """
    tree = measure.tree
    worst = 0.0
    n_checked = 0
    for k1 in range(tree.depth):
        verts1, w1 = measure.level(k1)
        scale = tree.eta ** k1 * tree.r
        for i, v in enumerate(verts1):
            d = geodesic_distance(g, int(v), limit=3 * scale)
            near1 = float(w1[d[verts1] < scale].sum())
            worst = max(worst, abs(near1 - w1[i]))
            for k2 in range(k1 + 1, tree.depth + 1):
                verts2, w2 = measure.level(k2)
                tele = float(w2[d[verts2] < 3 * scale].sum())
                worst = max(worst, abs(tele - w1[i]))
                n_checked += 1
    masses = [float(w.sum()) for w in measure.weights]
    worst_mass = max(abs(m - 1.0) for m in masses)
    return {
        "max_error": worst,
        "max_mass_error": worst_mass,
        "n_checked": n_checked,
        "level_masses": masses,
        "ok": bool(worst <= atol and worst_mass <= atol),
    }


def verify_separation(tree: GenerationTree) -> dict:
    """Exact pairwise generation-point separation: >= 8 eta^k r - 2h."""
    g = tree.dd.g
    worst = math.inf
    ok = True
    for lvl in tree.levels[1:]:
        verts = tree.vertices_at(lvl.k)
        gap = 8 * lvl.radius - 2 * g.h
        for i, v in enumerate(verts):
            if i + 1 == verts.size:
                continue
            d = geodesic_distance(g, int(v), limit=3 * gap)
            others = verts[i + 1:]
            dmin = float(np.min(np.where(np.isfinite(d[others]), d[others], np.inf))) \
                if others.size else math.inf
            if dmin < worst:
                worst = dmin
            if dmin < gap - _EPS * g.h:
                ok = False
    return {"ok": ok, "min_distance": worst}


def verify_window_consistency(tree: GenerationTree) -> dict:
    """Children coincide with the level set inside the parent window ball."""
    g = tree.dd.g
    ok = True
    for k in range(tree.depth):
        parents = tree.levels[k].points
        child_verts = tree.vertices_at(k + 1)
        window = 2 * tree.eta ** k * tree.r
        for pi, parent in enumerate(parents):
            d = geodesic_distance(g, parent.vertex, limit=window)
            in_ball = set(int(v) for v in child_verts[d[child_verts] < window])
            children = {
                int(tree.levels[k + 1].points[i].vertex)
                for i in tree.children(k, pi)
            }
            if in_ball != children:
                ok = False
    return {"ok": ok}


def verify_frostman_bound(
    measure: FrostmanMeasure,
    p: float,
    q_visibility: Optional[float] = None,
    n_extra_centers: int = 16,
    n_radii: int = 6,
    seed: int = 0,
) -> dict:
    """Empirical constants of the measure growth bound.

    Samples centers (deepest-level atoms plus random boundary vertices) and
    radii, and reports the smallest admissible constants for
      nu(B(x, rho)) <= c_frost * (rho/r)^p * mu(B(x, rho)) / mu(B(w0, r))
    and the same bound with the domain-restricted mass mu(B cap Omega)
    in place of mu(B) (constant ``c_local``).  When the visibility exponent
    is supplied the epsilon with q + epsilon = p is recorded alongside.
    """
    tree = measure.tree
    dd = tree.dd
    g = dd.g
    r = tree.r
    mu_root = tree.root.ball_mass_at_vertex
    atoms, w_atoms = measure.atoms()

    rng = np.random.default_rng(seed)
    bnd = dd.boundary_ids
    extra = rng.choice(bnd, size=min(n_extra_centers, bnd.size), replace=False)
    centers = np.unique(np.concatenate([atoms, extra]))
    radii = np.geomspace(4 * g.h, r, n_radii)

    c_frost = 0.0
    c_local = 0.0
    rows = []
    for x in centers:
        d = geodesic_distance(g, int(x), limit=float(radii[-1]))
        for rho in radii:
            nu = float(w_atoms[d[atoms] < rho].sum())
            if nu <= 0:
                continue
            inside = d < rho
            mu = float(g.mass[inside].sum())
            mu_om = float(g.mass[inside & dd.interior].sum())
            if mu > 0:
                c_frost = max(c_frost, nu * (rho / r) ** p * mu_root / mu)
            if mu_om > 0:
                c_local = max(c_local, nu * (rho / r) ** p * mu_root / mu_om)
            rows.append({"center": int(x), "rho": float(rho), "nu": nu,
                         "mu": mu, "mu_omega": mu_om})
    out = {
        "c_frost": c_frost,
        "c_local": c_local,
        "p": p,
        "mu_root": mu_root,
        "r": r,
        "n_samples": len(rows),
        "ok": bool(math.isfinite(c_frost) and c_frost > 0),
    }
    if q_visibility is not None:
        out["epsilon"] = p - q_visibility
        out["exponent_q_plus_eps"] = q_visibility + (p - q_visibility)
    return out


def john_curve_from_generation(
    tree: GenerationTree,
    k: int,
    idx: int,
    c: Optional[float] = None,
    slack: float = 0.0,
) -> tuple[Curve, dict]:
    """Concatenated curve z0 -> generation point, with its certificate.

    Geodesic from the point's vertex into its ball center, then chain-center
    geodesics level by level down to z0; reversed at the end.  The default
    certificate constant is 4M with M the tree's chain bound.
    """
    dd = tree.dd
    g = dd.g
    if c is None:
        c = 4 * max(chain_bound(tree)["M"], 1)

    segments: list[Curve] = []
    level = k
    point = tree.levels[k].points[idx]
    w = point.vertex
    lim0 = tree.levels[k].radius + 2 * g.h if k > 0 else tree.r + 2 * g.h
    segments.append(Curve(shortest_path(g, w, point.ball_center,
                                        dist_to_dst=_limited_field(g, point.ball_center, lim0))))
    seg_levels = [k]
    while level > 0:
        chained = tree.levels[level].chains[point.parent]
        path = chained.chain_paths[point.ball_center]
        lim = 2 * chained.radius + 2 * g.h
        for a, b in zip(path[:-1], path[1:]):
            segments.append(Curve(shortest_path(g, int(a), int(b),
                                                dist_to_dst=_limited_field(g, int(b), lim))))
            seg_levels.append(level)
        parent = tree.levels[level - 1].points[point.parent]
        point, level = parent, level - 1

    curve = concatenate_curves(segments)
    curve = Curve(curve.vertices[::-1].copy())   # orient z0 -> w
    check = verify_john_curve(dd, curve, c, slack=slack)

    # Depth certificate along chain segments: d_Omega >= radius/2 - h.
    depth_ok = True
    for seg, lvl in zip(segments[1:], seg_levels[1:]):
        need = tree.levels[lvl].radius / 2 - g.h
        if float(dd.d_omega[seg.vertices].min()) < need - _EPS * g.h:
            depth_ok = False
    info = {
        "c": c,
        "ok": check.ok,
        "worst_ratio": check.worst_ratio,
        "witness": check.witness,
        "chain_depth_ok": depth_ok,
        "length": curve.length(g),
    }
    return curve, info


def _limited_field(g: SpaceGraph, target: int, limit: float) -> np.ndarray:
    d = geodesic_distance(g, target, limit=limit)
    return d
