"""Codimension-t Hausdorff content relative to a finite ball family.

The content of a target set A at codimension t and scale cap R is

    inf { sum_i mu(B_i) / r_i^t  :  A is covered by balls B_i, r_i <= R }.

All estimates here are family-relative: candidate balls come from an explicit
finite family (default: centers on A, radii on a geometric grid).  Three
estimators bracket the family value:

* greedy weighted set cover (upper),
* branch-and-bound over the family (exact, small instances),
* the packing dual LP  max nu(A) s.t. nu(B) <= mu(B)/r^t  (lower; this is
  the exact dual of the fractional-cover relaxation, so lower <= exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import VisboundError
from .space import Ball, SpaceGraph, geodesic_distance


@dataclass
class ContentQuery:
    target: np.ndarray
    t: float
    radius_cap: float
    centers: Optional[np.ndarray] = None
    radii: Optional[np.ndarray] = None

    def __post_init__(self):
        self.target = np.unique(np.asarray(self.target, dtype=np.int64))
        if self.t < 0:
            raise VisboundError("bad-codimension", f"t={self.t}")
        if self.radius_cap <= 0:
            raise VisboundError("bad-radii", f"R={self.radius_cap}")
        if self.centers is not None:
            self.centers = np.unique(np.asarray(self.centers, dtype=np.int64))
        if self.radii is not None:
            self.radii = np.asarray(sorted(set(float(r) for r in self.radii)))


def default_radii(h: float, radius_cap: float) -> np.ndarray:
    """Geometric grid h * 2^j capped at R; errors when R < h."""
    if radius_cap < h:
        raise VisboundError("bad-radii", f"cap {radius_cap} below cell size {h}")
    out = []
    r = h
    while r <= radius_cap * (1 + 1e-12):
        out.append(r)
        r *= 2
    return np.asarray(out)


@dataclass
class _Candidate:
    center: int
    radius: float
    cost: float
    cover: np.ndarray  # positions into query.target


def _build_candidates(g: SpaceGraph, query: ContentQuery) -> list[_Candidate]:
    centers = query.centers if query.centers is not None else query.target
    radii = query.radii if query.radii is not None else default_radii(g.h, query.radius_cap)
    if radii.size == 0 or radii[0] < g.h or radii[-1] > query.radius_cap * (1 + 1e-12):
        raise VisboundError("bad-radii", "radii must lie in [h, R]")
    pos = -np.ones(g.n, dtype=np.int64)
    pos[query.target] = np.arange(query.target.size)
    rmax = float(radii[-1])
    out = []
    for x in centers:
        d = geodesic_distance(g, int(x), limit=rmax)
        for r in radii:
            inside = d < r
            cover = pos[inside]
            cover = np.sort(cover[cover >= 0])
            if cover.size == 0:
                continue
            cost = float(g.mass[inside].sum()) / r ** query.t
            out.append(_Candidate(int(x), float(r), cost, cover))
    return out


@dataclass
class ContentEstimate:
    value: float
    kind: str                      # "upper" | "exact" | "lower"
    t: float
    radius_cap: float
    cover: list = field(default_factory=list)       # chosen Balls (upper/exact)
    dual: Optional[np.ndarray] = None               # packing measure on target (lower)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "value": self.value,
            "kind": self.kind,
            "t": self.t,
            "radius_cap": self.radius_cap,
            "cover": [{"center": b.center, "radius": b.radius} for b in self.cover],
            "diagnostics": {k: v for k, v in self.diagnostics.items()},
        }
        if self.dual is not None:
            d["dual"] = list(map(float, self.dual))
        return d


def content_upper(g: SpaceGraph, query: ContentQuery) -> ContentEstimate:
    """Greedy weighted set cover; ties by larger radius, then smaller center."""
    if query.target.size == 0:
        return ContentEstimate(0.0, "upper", query.t, query.radius_cap)
    cands = _build_candidates(g, query)
    remaining = np.ones(query.target.size, dtype=bool)
    chosen, total = [], 0.0
    while remaining.any():
        best, best_key = None, None
        for k, cand in enumerate(cands):
            new = int(remaining[cand.cover].sum())
            if new == 0:
                continue
            key = (cand.cost / new, -cand.radius, cand.center, k)
            if best_key is None or key < best_key:
                best, best_key = cand, key
        if best is None:
            raise VisboundError(
                "insufficient-candidates",
                f"{int(remaining.sum())} target vertices not coverable",
            )
        chosen.append(Ball(best.center, best.radius))
        total += best.cost
        remaining[best.cover] = False
    return ContentEstimate(total, "upper", query.t, query.radius_cap, cover=chosen,
                           diagnostics={"n_candidates": len(cands)})


def content_exact_small(
    g: SpaceGraph,
    query: ContentQuery,
    cap_candidates: int = 24,
    cap_target: int = 16,
) -> ContentEstimate:
    """Exact family-relative content by branch and bound.

    Guarded: requires |candidates| <= cap_candidates or |target| <= cap_target,
    otherwise raises ``instance-too-large``.
    """
    if query.target.size == 0:
        return ContentEstimate(0.0, "exact", query.t, query.radius_cap)
    cands = _build_candidates(g, query)
    if len(cands) > cap_candidates and query.target.size > cap_target:
        raise VisboundError(
            "instance-too-large",
            f"{len(cands)} candidates, {query.target.size} targets",
        )

    # Deduplicate by coverage set, keeping the cheapest candidate.
    by_cover: dict[frozenset, _Candidate] = {}
    for cand in cands:
        key = frozenset(int(i) for i in cand.cover)
        old = by_cover.get(key)
        if old is None or (cand.cost, -cand.radius, cand.center) < (old.cost, -old.radius, old.center):
            by_cover[key] = cand
    cands = sorted(by_cover.values(), key=lambda cd: (cd.cost, -cd.radius, cd.center))

    n_t = query.target.size
    masks = [sum(1 << int(i) for i in cand.cover) for cand in cands]
    full = (1 << n_t) - 1
    covered_any = 0
    for m in masks:
        covered_any |= m
    if covered_any != full:
        raise VisboundError("insufficient-candidates", "some target vertex not coverable")

    covering = [[k for k, m in enumerate(masks) if m >> e & 1] for e in range(n_t)]
    cheapest = [min(cands[k].cost for k in covering[e]) for e in range(n_t)]

    try:
        incumbent = content_upper(g, query)
        best_val = incumbent.value
    except VisboundError:
        best_val = math.inf
    best_pick: list[int] = []

    order = sorted(range(n_t), key=lambda e: len(covering[e]))

    def bound(uncovered: int) -> float:
        lb_max, lb_sum = 0.0, 0.0
        e = uncovered
        while e:
            low = (e & -e).bit_length() - 1
            lb_max = max(lb_max, cheapest[low])
            share = min(
                cands[k].cost / max(1, bin(masks[k] & uncovered).count("1"))
                for k in covering[low]
            )
            lb_sum += share
            e &= e - 1
        return max(lb_max, lb_sum)

    def branch(uncovered: int, cost: float, picked: list[int]) -> None:
        nonlocal best_val, best_pick
        if uncovered == 0:
            if cost < best_val - 1e-15:
                best_val, best_pick = cost, list(picked)
            return
        if cost + bound(uncovered) >= best_val - 1e-15:
            return
        e = next(x for x in order if uncovered >> x & 1)
        for k in sorted(covering[e], key=lambda k: (cands[k].cost, -cands[k].radius, cands[k].center)):
            picked.append(k)
            branch(uncovered & ~masks[k], cost + cands[k].cost, picked)
            picked.pop()

    branch(full, 0.0, [])
    if best_pick:
        cover = [Ball(cands[k].center, cands[k].radius) for k in best_pick]
    elif math.isfinite(best_val):
        cover = list(incumbent.cover)   # greedy was already optimal
    else:
        cover = []
    return ContentEstimate(best_val, "exact", query.t, query.radius_cap, cover=cover,
                           diagnostics={"n_candidates": len(cands)})


def content_lower_frostman(
    g: SpaceGraph,
    query: ContentQuery,
    measure: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> ContentEstimate:
    """Lower bound via a packing measure on the target.

    Without ``measure``: solve  max nu(A)  s.t.  nu(B) <= mu(B)/r^t for every
    candidate ball (the exact LP dual of fractional cover).  With ``measure``
    (atom ids, weights): scale the given measure to feasibility and report
    the scaled mass.  +inf is returned when no candidate covers some target
    vertex (the family admits no cover at all).
    """
    if query.target.size == 0:
        return ContentEstimate(0.0, "lower", query.t, query.radius_cap)
    cands = _build_candidates(g, query)

    if measure is not None:
        atoms, weights = measure
        atoms = np.asarray(atoms, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        pos = {int(v): i for i, v in enumerate(query.target)}
        w_on_target = np.zeros(query.target.size)
        for a, w in zip(atoms, weights):
            if int(a) in pos:
                w_on_target[pos[int(a)]] += w
        lam = math.inf
        binding = None
        for cand in cands:
            nu_b = float(w_on_target[cand.cover].sum())
            if nu_b > 0 and cand.cost / nu_b < lam:
                lam = cand.cost / nu_b
                binding = cand
        if not math.isfinite(lam):
            raise VisboundError("no-mass", "measure puts no mass on any candidate ball")
        value = lam * float(w_on_target.sum())
        diag = {"lambda": lam, "binding_center": binding.center, "binding_radius": binding.radius}
        return ContentEstimate(value, "lower", query.t, query.radius_cap,
                               dual=lam * w_on_target, diagnostics=diag)

    covered = np.zeros(query.target.size, dtype=bool)
    for cand in cands:
        covered[cand.cover] = True
    if not covered.all():
        return ContentEstimate(math.inf, "lower", query.t, query.radius_cap,
                               diagnostics={"uncovered": int((~covered).sum())})

    n = query.target.size
    a_rows, a_cols, a_data = [], [], []
    for i, cand in enumerate(cands):
        a_rows.extend([i] * cand.cover.size)
        a_cols.extend(int(x) for x in cand.cover)
        a_data.extend([1.0] * cand.cover.size)
    import scipy.sparse as sp

    a_ub = sp.csr_matrix((a_data, (a_rows, a_cols)), shape=(len(cands), n))
    b_ub = np.asarray([cand.cost for cand in cands])
    res = linprog(-np.ones(n), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    if not res.success:
        raise VisboundError("lp-failed", res.message)
    return ContentEstimate(float(-res.fun), "lower", query.t, query.radius_cap,
                           dual=res.x, diagnostics={"n_candidates": len(cands)})


def verify_content_scaling(
    g: SpaceGraph,
    target: np.ndarray,
    t: float,
    tau: float,
    rho: float,
    exact: bool = True,
    centers: Optional[np.ndarray] = None,
    radii: Optional[np.ndarray] = None,
) -> dict:
    """Check rho^(tau - t) * content_tau >= content_t at radius cap rho.

    Exact mode computes both sides exactly over the family; otherwise the
    verifiable direction (upper at tau vs lower at t) is used.
    """
    if tau < t:
        raise VisboundError("bad-codimension", f"need tau >= t, got {tau} < {t}")
    q_tau = ContentQuery(target, tau, rho, centers=centers, radii=radii)
    q_t = ContentQuery(target, t, rho, centers=centers, radii=radii)
    if exact:
        e_tau = content_exact_small(g, q_tau)
        e_t = content_exact_small(g, q_t)
    else:
        e_tau = content_upper(g, q_tau)
        e_t = content_lower_frostman(g, q_t)
    lhs = rho ** (tau - t) * e_tau.value
    rhs = e_t.value
    return {
        "lhs": lhs,
        "rhs": rhs,
        "margin": lhs - rhs,
        "ok": bool(lhs >= rhs - 1e-12 * max(1.0, abs(rhs))),
        "kind_tau": e_tau.kind,
        "kind_t": e_t.kind,
    }


def verify_scale_change(
    g: SpaceGraph,
    target: np.ndarray,
    t: float,
    cover: Sequence[Ball],
    rho: float,
) -> dict:
    """Refine a coarse cover to scale rho and report the empirical constant.

    Every ball with radius > rho is replaced by radius-rho balls centered on
    a maximal rho/2-separated subset of its members (greedy by vertex id);
    maximality makes the refined balls cover the original one.  Reports
    C = refined_cost / ((alpha/rho)^t * original_cost) with alpha the largest
    original radius, plus the max overlap multiplicity of the refined balls.
    """
    target = np.unique(np.asarray(target, dtype=np.int64))
    if rho < g.h:
        raise VisboundError("bad-radii", f"rho={rho} below cell size")
    covered = np.zeros(g.n, dtype=bool)
    original_cost = 0.0
    alpha = max(b.radius for b in cover)
    refined: list[Ball] = []
    refined_cost = 0.0
    overlap = np.zeros(g.n, dtype=np.int32)

    for b in cover:
        d = geodesic_distance(g, b.center, limit=max(b.radius, rho))
        members = d < b.radius
        covered |= members
        original_cost += float(g.mass[members].sum()) / b.radius ** t
        if b.radius <= rho:
            refined.append(b)
            refined_cost += float(g.mass[members].sum()) / b.radius ** t
            overlap[members] += 1
            continue
        member_ids = np.flatnonzero(members)
        blocked = np.zeros(g.n, dtype=bool)
        for v in member_ids:
            if blocked[v]:
                continue
            dv = geodesic_distance(g, int(v), limit=rho)
            blocked[dv < rho / 2] = True
            ball_m = dv < rho
            refined.append(Ball(int(v), rho))
            refined_cost += float(g.mass[ball_m].sum()) / rho ** t
            overlap[ball_m] += 1

    if not covered[target].all():
        raise VisboundError("insufficient-candidates", "cover does not cover the target")

    c_emp = refined_cost / ((alpha / rho) ** t * original_cost)
    return {
        "C": c_emp,
        "refined_value": refined_cost,
        "original_value": original_cost,
        "alpha": alpha,
        "rho": rho,
        "n_refined": len(refined),
        "max_overlap": int(overlap.max()),
        "ok": bool(refined_cost <= c_emp * (alpha / rho) ** t * original_cost * (1 + 1e-12)),
    }
